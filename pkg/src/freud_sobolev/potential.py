"""Mhaskar-Rakhmanov-Saff numbers, the exterior conformal map and the
Szego function of the rescaled quartic weight.

Convention: ``W = exp(-Q)`` with ``Q(x) = x**4 / 2``, so ``W**2 = exp(-x**4)``
is the orthogonality measure and the quartic MRS numbers are
``a_n = (4n/3)**(1/4)``.

Closed form of the Szego function. With ``u = sqrt(z**2 - a**2)``,

    -t**4/(z-t) = t**3 + z t**2 + z**2 t + z**3 - z**4/(z-t),

and the first-kind Chebyshev moments on [-a, a] (pi, 0, pi a**2/2, 0) plus
``int dt/((z-t) sqrt(a**2-t**2)) = pi/u`` reduce the integral to

    log D_n(z) = u (a**2 z/2 + z**3)/2 - z**4/2.

For large |z| the two terms cancel; multiplying by the conjugate gives the
equivalent ``-a**4 z**2 (3 z**2 + a**2) / (8 (u z (z**2 + a**2/2) + z**4))``,
used when ``|z| > 2a``. (That form has a removable 0/0 at ``z = +-i a/sqrt(3)``,
which is why it is not used everywhere.)
"""

from __future__ import annotations

import cmath
import csv
import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

import numpy as np

from .errors import ArgumentError, DomainError, FieldError
from .quadrature import gauss_chebyshev

__all__ = [
    "ExternalField",
    "MrsNumbers",
    "BalanceExponent",
    "NonPowerLawWarning",
    "freud_field",
    "QUARTIC",
    "HERMITE",
    "mrs_number",
    "mrs_table",
    "quartic_mrs",
    "phi",
    "szego_log",
    "szego_fn",
    "szego_quadrature",
    "rescaled_weight",
    "balance_exponent",
]


@dataclass(frozen=True)
class ExternalField:
    """Even field Q through its derivative Q' (odd, positive on x > 0)."""

    q_prime: Callable[[float], float]
    name: str
    closed_form_mrs: Optional[Callable[[float], float]] = None
    q_second: Optional[Callable[[float], float]] = field(default=None, compare=False)


def freud_field(m: float, c: float = 1.0) -> ExternalField:
    """Field ``Q(x) = c |x|**m`` with its closed-form MRS numbers."""
    if m <= 1 or c <= 0:
        raise ArgumentError("need m > 1 and c > 0")
    # int_0^1 t^m / sqrt(1-t^2) dt = sqrt(pi) Gamma((m+1)/2) / (2 Gamma(m/2 + 1))
    lam = math.gamma((m + 1) / 2) / (math.sqrt(math.pi) * math.gamma(m / 2 + 1))

    def q_prime(x):
        return c * m * math.copysign(abs(x) ** (m - 1), x)

    def q_second(x):
        return c * m * (m - 1) * abs(x) ** (m - 2)

    def closed(n):
        return (n / (c * m * lam)) ** (1.0 / m)

    return ExternalField(q_prime, f"{c:g}|x|^{m:g}", closed, q_second)


QUARTIC = freud_field(4, 0.5)
HERMITE = freud_field(2, 0.5)


def quartic_mrs(n: float) -> float:
    return (4.0 * n / 3.0) ** 0.25


@dataclass(frozen=True)
class MrsNumbers:
    values: dict

    def write_csv(self, fh) -> None:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["n", "a_n"])
        for n in sorted(self.values):
            w.writerow([n, repr(float(self.values[n]))])


def _mrs_rhs(field: ExternalField, a: float, nodes, with_derivative: bool):
    # even integrand: (2/pi) int_0^1 = (1/pi) int_{-1}^{1}, Chebyshev weights pi/m
    m = len(nodes)
    val = sum(a * t * field.q_prime(a * t) for t in nodes) / m
    if not with_derivative:
        return val, None
    if field.q_second is not None:
        d = sum(t * field.q_prime(a * t) + a * t * t * field.q_second(a * t) for t in nodes) / m
    else:
        h = 1e-6 * a
        d = (_mrs_rhs(field, a + h, nodes, False)[0] - _mrs_rhs(field, a - h, nodes, False)[0]) / (2 * h)
    return val, d


def mrs_number(field: ExternalField, n: float, tol: float = 1e-14, nodes: int = 64) -> float:
    """Positive root a of ``n = (2/pi) int_0^1 a t Q'(a t) / sqrt(1 - t**2) dt``.

    The map a -> RHS(a) is increasing. A bracket is found by doubling or
    halving from a = 1, then Newton's method (derivative taken under the
    integral sign) refines it, falling back to bisection whenever a Newton
    step leaves the bracket.
    """
    if n <= 0:
        raise ArgumentError(f"n must be positive, got {n}")
    t = gauss_chebyshev(nodes).nodes
    lo = hi = 1.0
    if _mrs_rhs(field, 1.0, t, False)[0] < n:
        for _ in range(400):
            hi *= 2.0
            if _mrs_rhs(field, hi, t, False)[0] >= n:
                break
            lo = hi
        else:
            raise FieldError(f"no MRS bracket for n={n} in field {field.name}")
    else:
        for _ in range(400):
            lo /= 2.0
            if _mrs_rhs(field, lo, t, False)[0] <= n:
                break
            hi = lo
        else:
            raise FieldError(f"no MRS bracket for n={n} in field {field.name}")
    a = 0.5 * (lo + hi)
    for _ in range(200):
        f, d = _mrs_rhs(field, a, t, True)
        f -= n
        if abs(f) <= tol * n:
            return a
        if f > 0:
            hi = a
        else:
            lo = a
        step = a - f / d if d > 0 else None
        a = step if step is not None and lo < step < hi else 0.5 * (lo + hi)
        if hi - lo <= 4 * np.finfo(float).eps * hi:
            return a
    raise FieldError(f"MRS iteration did not converge for n={n}")


def mrs_table(field: ExternalField, ns, tol: float = 1e-14) -> MrsNumbers:
    return MrsNumbers({n: mrs_number(field, n, tol) for n in ns})


def _branch_sqrt(z, a):
    """sqrt(z**2 - a**2), positive for z > a, cut along [-a, a]."""
    return cmath.sqrt(z - a) * cmath.sqrt(z + a)


def phi(z) -> complex:
    """``z + sqrt(z**2 - 1)``: maps C \\ [-1, 1] onto |w| > 1."""
    z = complex(z)
    if z.imag == 0 and -1.0 <= z.real <= 1.0:
        raise DomainError(f"phi undefined on the cut [-1, 1], z={z}")
    return z + _branch_sqrt(z, 1.0)


def _check_off_cut(z: complex, a: float):
    if z.imag == 0 and -a <= z.real <= a:
        raise DomainError(f"z={z} lies on the cut [-{a}, {a}]")


def szego_log(n: int, z, a: float | None = None) -> complex:
    """log D_n(z) from the closed form."""
    a = quartic_mrs(n) if a is None else float(a)
    z = complex(z)
    _check_off_cut(z, a)
    u = _branch_sqrt(z, a)
    if abs(z) > 2 * a:
        den = 8 * (u * z * (z * z + a * a / 2) + z ** 4)
        return -a ** 4 * z * z * (3 * z * z + a * a) / den
    return u * (a * a * z / 2 + z ** 3) / 2 - z ** 4 / 2


def szego_fn(n: int, z, a: float | None = None) -> complex:
    """Szego function D_n(z) of ``exp(-x**4)`` rescaled to [-a_n, a_n]."""
    return cmath.exp(szego_log(n, z, a))


def szego_quadrature(n: int, z, a: float | None = None, nodes: int = 64,
                     max_nodes: int = 1 << 16, rtol: float = 1e-14, log: bool = False) -> complex:
    """D_n(z) from Chebyshev-Gauss quadrature of the defining integral.

    Substituting t = a s turns the integral into ``int_{-1}^{1}
    -a**4 s**4 / ((z - a s) sqrt(1 - s**2)) ds``; the rule is doubled
    until the exponent is stable to ``rtol``. ``log=True`` returns the
    exponent itself, which stays finite where D_n underflows.
    """
    a = quartic_mrs(n) if a is None else float(a)
    z = complex(z)
    _check_off_cut(z, a)
    u = _branch_sqrt(z, a)
    prev = None
    m = nodes
    while m <= max_nodes:
        s = np.asarray(gauss_chebyshev(m).nodes)
        integral = (math.pi / m) * np.sum(-(a ** 4) * s ** 4 / (z - a * s))
        expo = u * integral / (2 * math.pi)
        if prev is not None and abs(expo - prev) <= rtol * max(1.0, abs(expo)):
            break
        prev = expo
        m *= 2
    else:
        expo = prev
    return expo if log else cmath.exp(expo)


def rescaled_weight(n: int, t: float):
    """``W**(1/n)(a_{n+1} t)`` for the quartic field, and its limit in n.

    Returns ``(exp(-a_{n+1}**4 t**4 / (2n)), exp(-2 t**4 / 3))``.
    """
    if not -1.0 < t < 1.0:
        raise ArgumentError(f"t must lie in (-1, 1), got {t}")
    if n < 1:
        raise ArgumentError(f"n must be positive, got {n}")
    a4 = quartic_mrs(n + 1) ** 4
    return math.exp(-a4 * t ** 4 / (2 * n)), math.exp(-2.0 * t ** 4 / 3.0)


class NonPowerLawWarning(UserWarning):
    """MRS numbers are not well described by c * n**gamma."""


@dataclass(frozen=True)
class BalanceExponent:
    exponent: float
    gamma: float
    mode: str
    fit_residual: float

    @property
    def statement(self) -> str:
        e = Fraction(self.exponent).limit_denominator(24)
        return f"lambda_n ~ n^({e})"


def balance_exponent(field: ExternalField, mode: str = "standard",
                     ns=(100, 1000, 10000), residual_tol: float = 1e-3) -> BalanceExponent:
    """Exponent e with lambda_n ~ n**e balancing the Sobolev inner product.

    gamma is fitted by least squares to ``ln a_n`` against ``ln n`` on MRS
    numbers from the numerical solver. ``standard`` balances
    ``lambda_n n**2 ~ a_{n+1}**2`` (e = 2 gamma - 2); ``coherent_hermite``
    balances ``lambda_n ~ a_{n+2}**4 n**-2`` (e = 4 gamma - 2).
    """
    if mode not in ("standard", "coherent_hermite"):
        raise ArgumentError(f"unknown mode {mode!r}")
    x = np.log(np.asarray(ns, dtype=float))
    y = np.log([mrs_number(field, n) for n in ns])
    A = np.vstack([x, np.ones_like(x)]).T
    coef = np.linalg.lstsq(A, y, rcond=None)[0]
    gamma = coef[0]
    resid = float(np.max(np.abs(A @ coef - y)))
    if resid > residual_tol:
        warnings.warn(f"MRS numbers of {field.name} deviate from a power law "
                      f"(max log residual {resid:.2e})", NonPowerLawWarning, stacklevel=2)
    e = 2 * gamma - 2 if mode == "standard" else 4 * gamma - 2
    return BalanceExponent(float(e), float(gamma), mode, resid)
