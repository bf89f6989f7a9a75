"""Evaluation of P_n and P_n' for the quartic Freud weight.

P_n(z) overflows binary64 for n in the low thousands, so values travel as
:class:`ScaledValue` (a mantissa with ``1 <= |m| < 2`` times an integer
power of two). Inside the recurrence the running pair is rescaled by a
power of two whenever it leaves ``[2**-512, 2**512]``; powers of two are
exact, so scaling never perturbs the phase of complex values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath

from .errors import ArgumentError, ScaleError
from .freud_coeffs import CoeffTable

__all__ = [
    "ScaledValue",
    "PolyValue",
    "eval_p",
    "eval_p_derivative",
    "eval_p_normalized",
    "p_sequence",
    "monomial_coefficients",
    "PExpansion",
]

_BIG = 2.0 ** 512
_SMALL = 2.0 ** -512
_LN2 = math.log(2.0)


def _is_mp(x) -> bool:
    return isinstance(x, (mpmath.mpf, mpmath.mpc))


def _ldexp(z, k: int):
    """z * 2**k for real/complex floats and mpmath numbers."""
    if _is_mp(z):
        if isinstance(z, mpmath.mpc):
            return mpmath.mpc(mpmath.ldexp(z.real, k), mpmath.ldexp(z.imag, k))
        return mpmath.ldexp(z, k)
    if isinstance(z, complex):
        return complex(math.ldexp(z.real, k), math.ldexp(z.imag, k))
    return math.ldexp(z, k)


def _frexp_abs(z):
    """Exponent e with |z| = f * 2**e, 0.5 <= f < 1."""
    if _is_mp(z):
        return mpmath.frexp(abs(z))[1]
    if isinstance(z, complex):
        # abs() of a complex can overflow when both parts are near the limit
        a = max(abs(z.real), abs(z.imag))
        e = math.frexp(a)[1]
        return math.frexp(abs(_ldexp(z, -e)))[1] + e
    return math.frexp(z)[1]


@dataclass(frozen=True)
class ScaledValue:
    """``mantissa * 2**exponent`` with ``1 <= |mantissa| < 2`` or zero."""

    mantissa: complex
    exponent: int = 0

    @classmethod
    def of(cls, value, exponent: int = 0) -> "ScaledValue":
        if value == 0:
            return cls(0 * value, 0)
        e = _frexp_abs(value) - 1
        m = _ldexp(value, -e)
        # guard against abs() rounding up to exactly 2
        if abs(m) >= 2:
            m = _ldexp(m, -1)
            e += 1
        return cls(m, exponent + e)

    @property
    def is_zero(self) -> bool:
        return self.mantissa == 0

    def __mul__(self, other):
        if isinstance(other, ScaledValue):
            return ScaledValue.of(self.mantissa * other.mantissa, self.exponent + other.exponent)
        return ScaledValue.of(self.mantissa * other, self.exponent)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, ScaledValue):
            if other.is_zero:
                raise ZeroDivisionError("division by a zero ScaledValue")
            return ScaledValue.of(self.mantissa / other.mantissa, self.exponent - other.exponent)
        return ScaledValue.of(self.mantissa / other, self.exponent)

    def __neg__(self):
        return ScaledValue(-self.mantissa, self.exponent)

    def __add__(self, other: "ScaledValue"):
        if self.is_zero:
            return other
        if other.is_zero:
            return self
        if self.exponent >= other.exponent:
            hi, lo = self, other
        else:
            hi, lo = other, self
        shift = lo.exponent - hi.exponent
        # beyond the exponent range of binary64 the smaller term is invisible
        small = _ldexp(lo.mantissa, shift) if shift > -1100 or _is_mp(lo.mantissa) else 0
        return ScaledValue.of(hi.mantissa + small, hi.exponent)

    def __sub__(self, other: "ScaledValue"):
        return self + (-other)

    def log_abs(self):
        if self.is_zero:
            return -math.inf
        if _is_mp(self.mantissa):
            return mpmath.log(abs(self.mantissa)) + self.exponent * mpmath.log(2)
        return math.log(abs(self.mantissa)) + self.exponent * _LN2

    def value(self):
        """Plain number; may overflow to inf (binary64) for large exponents."""
        if not _is_mp(self.mantissa) and self.exponent > 1100:
            m = self.mantissa
            if isinstance(m, complex):
                return complex(math.copysign(math.inf, m.real) if m.real else 0.0,
                               math.copysign(math.inf, m.imag) if m.imag else 0.0)
            return math.copysign(math.inf, m)
        return _ldexp(self.mantissa, self.exponent)

    def __complex__(self):
        return complex(self.value())


@dataclass(frozen=True)
class PolyValue:
    """P_n(z) and P_{n-1}(z) at one point."""

    n: int
    p_n: ScaledValue
    p_nm1: ScaledValue


def _check_n(table: CoeffTable, n: int):
    if not 0 <= n <= table.N:
        raise ArgumentError(f"degree {n} outside table range 0..{table.N}")


def _coerce(table: CoeffTable, z):
    prec = table.precision
    if prec.extended:
        return mpmath.mpc(z)
    return complex(z)


def _recurrence(table: CoeffTable, n: int, z, store: bool):
    """Run the monic recurrence to degree n.

    Returns ``(values, exps)`` for every degree when ``store``; otherwise
    only the last two. Each entry is an unnormalized (value, exponent) pair.
    """
    bb = table.padded
    one = 1 + 0 * z
    p_prev, p = 0 * z, one
    e = 0
    vals = [(p, 0)] if store else None
    for k in range(n):
        p_next = z * p - bb[k] * p_prev
        a = abs(p_next)
        if a > _BIG or (a < _SMALL and p_next != 0):
            s = _frexp_abs(p_next) - 1
            p_next = _ldexp(p_next, -s)
            p = _ldexp(p, -s)
            e += s
        p_prev, p = p, p_next
        if store:
            vals.append((p, e))
    if store:
        return vals
    return (p_prev, e), (p, e)


def p_sequence(table: CoeffTable, n: int, z) -> list:
    """``[P_0(z), ..., P_n(z)]`` as ScaledValues."""
    _check_n(table, n)
    with table.precision.context():
        z = _coerce(table, z)
        return [ScaledValue.of(v, e) for v, e in _recurrence(table, n, z, True)]


def eval_p(table: CoeffTable, n: int, z) -> PolyValue:
    """P_n(z) and P_{n-1}(z) by the three-term recurrence.

    Degrees up to 2 use the closed forms 1, z, z**2 - b_1.
    """
    _check_n(table, n)
    with table.precision.context():
        z = _coerce(table, z)
        if n == 0:
            return PolyValue(0, ScaledValue.of(1 + 0 * z), ScaledValue.of(0 * z))
        if n == 1:
            return PolyValue(1, ScaledValue.of(z), ScaledValue.of(1 + 0 * z))
        if n == 2:
            return PolyValue(2, ScaledValue.of(z * z - table.bn(1)), ScaledValue.of(z))
        (pm1, e1), (p, e) = _recurrence(table, n, z, False)
        return PolyValue(n, ScaledValue.of(p, e), ScaledValue.of(pm1, e1))


def _structure_coefficient(table: CoeffTable, n: int):
    """4 ||P_n||^2 / ||P_{n-3}||^2 = 4 b_n b_{n-1} b_{n-2}."""
    bb = table.padded
    return 4 * bb[n] * bb[n - 1] * bb[n - 2]


def eval_p_derivative(table: CoeffTable, n: int, z, method: str = "structure") -> ScaledValue:
    """P_n'(z).

    ``method="structure"`` uses ``P_n' = n P_{n-1} + 4 b_n b_{n-1} b_{n-2} P_{n-3}``
    for n >= 3. ``method="monomial"`` differentiates the expanded monomial
    form and is meant as an extended-precision cross-check for n <= 30.
    """
    _check_n(table, n)
    with table.precision.context():
        z = _coerce(table, z)
        if n == 0:
            return ScaledValue.of(0 * z)
        if n == 1:
            return ScaledValue.of(1 + 0 * z)
        if n == 2:
            return ScaledValue.of(2 * z)
        if method == "monomial":
            if n > 30:
                raise ArgumentError("monomial differentiation limited to n <= 30")
            c = monomial_coefficients(table, n)
            acc = 0 * z
            for k in range(n, 0, -1):
                acc = acc * z + k * c[k]
            return ScaledValue.of(acc)
        if method != "structure":
            raise ArgumentError(f"unknown method {method!r}")
        seq = _recurrence(table, n - 1, z, True)
        p_nm1 = ScaledValue.of(*seq[n - 1])
        p_nm3 = ScaledValue.of(*seq[n - 3])
        return p_nm1 * n + p_nm3 * _structure_coefficient(table, n)


def eval_p_normalized(table: CoeffTable, n: int, z, scaled: bool = False):
    """P_n(z) / ||P_n|| with the norm applied in log space.

    Off the real axis this grows like ``exp(c n**(3/4) |Im z|)`` and leaves
    binary64 already for n of a few thousand; ``scaled=True`` returns a
    :class:`ScaledValue` that is always representable.
    """
    pv = eval_p(table, n, z).p_n
    prec = table.precision
    with prec.context():
        if pv.is_zero:
            return pv if scaled else pv.mantissa
        half = table.log_norm_sq[n] / 2
        if scaled:
            # split ln||P_n|| into a power of two and a remainder
            ln2 = prec.log(2) if prec.extended else _LN2
            k = int(math.floor(float(half / ln2)))
            return ScaledValue.of(pv.mantissa * prec.exp(k * ln2 - half), pv.exponent - k)
        log_scale = pv.exponent * (prec.log(2) if prec.extended else _LN2) - half
        if not prec.extended and abs(log_scale) > 700:
            raise ScaleError(f"|P_{n}(z)|/||P_{n}|| outside binary64 range (log {log_scale:.1f})")
        return pv.mantissa * prec.exp(log_scale)


def monomial_coefficients(table: CoeffTable, n: int) -> list:
    """Ascending monomial coefficients of P_n.

    The recurrence adds terms of equal sign, so this is accurate
    coefficient-wise, but evaluating the result is ill-conditioned for
    large n.
    """
    _check_n(table, n)
    bb = table.padded
    prec = table.precision
    with prec.context():
        zero, one = prec.zero(), prec.one()
        prev, cur = [], [one]
        for k in range(n):
            nxt = [zero] + cur
            for j, c in enumerate(prev):
                nxt[j] = nxt[j] - bb[k] * c
            prev, cur = cur, nxt
        return cur


class PExpansion:
    """Polynomial ``sum_k coeffs[k] P_k`` over the orthogonal basis.

    Evaluation runs the recurrence (stable where monomial evaluation is
    not) and :meth:`deriv` applies the structure relation termwise.
    """

    def __init__(self, table: CoeffTable, coeffs):
        self.table = table
        self.coeffs = list(coeffs)
        while len(self.coeffs) > 1 and self.coeffs[-1] == 0:
            self.coeffs.pop()

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, x):
        bb = self.table.padded
        p_prev, p = 0 * x, 1 + 0 * x
        acc = self.coeffs[0] * p
        for k in range(1, len(self.coeffs)):
            p_prev, p = p, x * p - bb[k - 1] * p_prev
            acc = acc + self.coeffs[k] * p
        return acc

    def deriv(self) -> "PExpansion":
        bb = self.table.padded
        zero = self.table.precision.zero()
        out = [zero] * max(len(self.coeffs) - 1, 1)
        for k, c in enumerate(self.coeffs):
            if k == 0 or c == 0:
                continue
            out[k - 1] = out[k - 1] + k * c
            if k >= 3:
                out[k - 3] = out[k - 3] + 4 * bb[k] * bb[k - 1] * bb[k - 2] * c
        return PExpansion(self.table, out)
