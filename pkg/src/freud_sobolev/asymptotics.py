"""Closed-form limits and convergence sweeps for Freud-Sobolev asymptotics.

A sweep measures a quantity on a grid of degrees, extrapolates the tail
and compares both the raw and the extrapolated value with the closed-form
limit.

Two extrapolators are available. Aitken's Delta-squared process on the
last three values removes one geometric error component. Quantities that
depend on z only through z/a_n (a_n ~ n**(1/4)) instead carry an error
expansion in powers of n**(-1/4); on a doubling grid every term of that
series is geometric with ratios 2**(-k/4) close to one, and three-point
Aitken is badly biased. Those sweeps use polynomial extrapolation in
``x = n**(-1/4)`` through the last four values (Richardson with the known
exponents 1/4, 1/2, 3/4) and still record the Aitken value.
"""

from __future__ import annotations

import cmath
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

from .errors import ArgumentError, DomainError, NumericError, RangeError
from .freud_coeffs import CoeffTable
from .poly_engine import p_sequence
from .potential import phi, quartic_mrs, szego_log
from .sobolev import LambdaSchedule, build_sobolev_table, eval_s, s_sweep

__all__ = [
    "LimitTargets",
    "ConvergenceReport",
    "kappa_limit",
    "aitken",
    "richardson",
    "verify_prop1",
    "verify_sn_infty",
    "verify_theorem1",
    "verify_lemma1",
    "verify_strong_asymptotics",
    "verify_pn_ratio",
    "verify_norm_ratio",
    "doubling_grid",
]

SQRT3 = math.sqrt(3.0)
TWO_SQRT3 = 2.0 * SQRT3
INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class LimitTargets:
    """kappa(L), b_L and the Sobolev/orthogonal ratio limit 1/(1 - b_L)."""

    L: float
    kappa_L: float
    b_L: float
    ratio_limit: float

    @property
    def kappa_infinite(self) -> bool:
        return math.isinf(self.kappa_L)


def _kappa_root(L: float) -> float:
    return (9 + 20 * SQRT3 * L + math.sqrt(768 * L * L + 360 * SQRT3 * L + 81)) / 18


def _kappa_phi(L: float) -> float:
    return 2 * L / SQRT3 * phi((20 * L + 3 * SQRT3) / (12 * L)).real


def characteristic(L: float, q: float) -> float:
    """``q**2 - (1 + 20 sqrt(3) L / 9) q + 4 L**2 / 3``."""
    return q * q - (1 + 20 * SQRT3 * L / 9) * q + 4 * L * L / 3


def kappa_limit(L: float, rtol: float = 1e-12) -> LimitTargets:
    """Limit of s_n = kappa_n(lambda_n)/||P_n||**2 when n**1.5 lambda_n -> L.

    Both closed forms are evaluated; a disagreement beyond ``rtol`` raises
    :class:`NumericError`.
    """
    L = float(L)
    if not L >= 0:
        raise ArgumentError(f"L must be >= 0, got {L}")
    if L == 0:
        return LimitTargets(0.0, 1.0, 0.0, 1.0)
    if math.isinf(L):
        return LimitTargets(math.inf, math.inf, 1.0 / 3.0, 1.5)
    k_root = _kappa_root(L)
    k_phi = _kappa_phi(L)
    if abs(k_root - k_phi) > rtol * k_root:
        raise NumericError(f"kappa forms disagree at L={L}: {k_root!r} vs {k_phi!r}")
    b = 2 * L / (SQRT3 * k_root)
    return LimitTargets(L, k_root, b, 1.0 / (1.0 - b))


def aitken(seq: Sequence) -> tuple:
    """Delta-squared acceleration of the last three terms.

    Returns ``(value, fallback)``; ``fallback`` is True when a difference
    or the second difference vanishes, in which case the last raw term is
    returned.
    """
    if len(seq) < 3:
        raise ArgumentError("aitken needs at least three terms")
    x0, x1, x2 = seq[-3], seq[-2], seq[-1]
    d1, d2 = x1 - x0, x2 - x1
    den = d2 - d1
    scale = max(abs(x0), abs(x1), abs(x2), 1e-300)
    if d1 == 0 or d2 == 0 or abs(den) <= 1e-14 * scale:
        return x2, True
    return x2 - d2 * d2 / den, False


def richardson(grid: Sequence[int], seq: Sequence, rate: float = 0.25, order: int = 3):
    """Value at x = 0 of the polynomial in ``x = n**-rate`` through the last
    ``order + 1`` points; cancels the error terms x, x**2, ..., x**order."""
    k = order + 1
    if len(seq) < k or len(grid) != len(seq):
        raise ArgumentError(f"richardson needs {k} points")
    xs = [float(n) ** -rate for n in grid[-k:]]
    ys = list(seq[-k:])
    # Neville's scheme evaluated at x = 0
    for j in range(1, k):
        ys = [(xs[i + j] * ys[i] - xs[i] * ys[i + 1]) / (xs[i + j] - xs[i]) for i in range(k - j)]
    return ys[0]


def _jsonable(v):
    if isinstance(v, complex):
        return [v.real, v.imag]
    if isinstance(v, float) and not math.isfinite(v):
        return str(v)
    return v


@dataclass
class ConvergenceReport:
    quantity: str
    grid: list
    values: list
    target: complex
    schedule: str | None = None
    z: complex | None = None
    extrapolated: complex | None = None
    flags: list = field(default_factory=list)
    method: str = "aitken"
    aitken_value: complex | None = None

    def __post_init__(self):
        if any(b <= a for a, b in zip(self.grid, self.grid[1:])):
            raise ArgumentError("grid must be strictly increasing")
        if self.extrapolated is None:
            self.extrapolated = self._extrapolate()

    def _extrapolate(self):
        if len(self.values) < 3:
            self.flags.append("short_grid")
            return self.values[-1]
        devs = [abs(v - self.target) for v in self.values[-3:]]
        monotone = devs[0] >= devs[1] >= devs[2] or devs[0] <= devs[1] <= devs[2]
        if not monotone:
            self.flags.append("non_monotone")
            return self.values[-1]
        value, fallback = aitken(self.values)
        if fallback:
            self.flags.append("aitken_fallback")
        self.aitken_value = value
        if self.method == "richardson":
            if len(self.values) >= 4:
                return richardson(self.grid, self.values)
            self.flags.append("short_grid")
        return value

    @property
    def deviation_raw(self) -> float:
        return abs(self.values[-1] - self.target)

    @property
    def deviation_extrapolated(self) -> float:
        return abs(self.extrapolated - self.target)

    def value_at(self, n: int):
        return self.values[self.grid.index(n)]

    def to_dict(self) -> dict:
        return {
            "quantity": self.quantity,
            "schedule": self.schedule,
            "z": _jsonable(self.z) if self.z is not None else None,
            "grid": list(self.grid),
            "values": [_jsonable(v) for v in self.values],
            "extrapolated": _jsonable(self.extrapolated),
            "target": _jsonable(self.target),
            "deviation_raw": self.deviation_raw,
            "deviation_extrapolated": self.deviation_extrapolated,
            "flags": list(self.flags),
            "method": self.method,
            "aitken": _jsonable(self.aitken_value),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def doubling_grid(a: int, b: int) -> list:
    if a < 1 or b < a:
        raise ArgumentError(f"bad grid bounds {a}:{b}")
    out = []
    n = a
    while n <= b:
        out.append(n)
        n *= 2
    return out


def _check_grid(table: CoeffTable, grid: Sequence[int], low: int = 3) -> list:
    grid = [int(n) for n in grid]
    if not grid:
        raise ArgumentError("empty grid")
    if grid[-1] > table.N or max(grid) > table.N:
        raise RangeError(f"grid reaches n={max(grid)} beyond coefficient table N={table.N}")
    if min(grid) < low:
        raise ArgumentError(f"grid must start at n >= {low}")
    return grid


def _check_z(z) -> complex:
    z = complex(z)
    if z.imag == 0:
        raise DomainError(f"z must be non-real, got {z}")
    return z


def _map(fn: Callable, items, threads: int):
    if threads <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(fn, items))


def verify_prop1(table: CoeffTable, schedule: LambdaSchedule, grid: Sequence[int]) -> ConvergenceReport:
    """s_n = kappa_n(lambda_n)/||P_n||**2 against kappa(L)."""
    L = schedule.classification
    if not math.isfinite(L):
        raise ArgumentError("schedule must classify to a finite L")
    grid = _check_grid(table, grid)
    s = s_sweep(table, schedule, grid)
    values = [float(s[n]) for n in grid]
    flags = []
    bb = table.padded
    for n, v in zip(grid, values):
        if v < 1 + float(schedule(n)) * n * n / float(bb[n]):
            flags.append(f"lower_bound_violated:{n}")
    return ConvergenceReport("s_n", grid, values, kappa_limit(L).kappa_L, schedule.spec, flags=flags)


def verify_sn_infty(table: CoeffTable, schedule: LambdaSchedule, grid: Sequence[int]) -> ConvergenceReport:
    """s_n / (lambda_n n**1.5) against 2 sqrt(3) for L = infinity."""
    if not math.isinf(schedule.classification):
        raise ArgumentError("schedule must classify to L = infinity")
    grid = _check_grid(table, grid)
    s = s_sweep(table, schedule, grid)
    values = [float(s[n]) / (float(schedule(n)) * n ** 1.5) for n in grid]
    return ConvergenceReport("s_n/(lambda_n n^1.5)", grid, values, TWO_SQRT3, schedule.spec)


def _ratio(table: CoeffTable, lam, n: int, z: complex) -> complex:
    stab = build_sobolev_table(table, lam, n)
    S = eval_s(table, stab, n, z)
    P = p_sequence(table, n, z)[n]
    return complex((S / P).value())


def verify_theorem1(table: CoeffTable, schedule: LambdaSchedule, z, grid: Sequence[int],
                    threads: int = 1) -> ConvergenceReport:
    """f_n(z) = S_{n, lambda_n}(z) / P_n(z) against 1/(1 - b_L)."""
    z = _check_z(z)
    grid = _check_grid(table, grid)
    target = kappa_limit(schedule.classification).ratio_limit
    values = _map(lambda n: _ratio(table, schedule(n, table.precision), n, z), grid, threads)
    return ConvergenceReport("f_n", grid, values, target, schedule.spec, z, method="richardson")


def _lemma_value(table: CoeffTable, schedule: LambdaSchedule, n: int, z: complex) -> float:
    prec = table.precision
    P = p_sequence(table, n, z)[n]
    a = eval_s(table, build_sobolev_table(table, schedule(n - 2, prec), n), n, z)
    b = eval_s(table, build_sobolev_table(table, schedule(n, prec), n), n, z)
    return abs(complex(((a - b) / P).value()))


def verify_lemma1(table: CoeffTable, schedule: LambdaSchedule, z, grid: Sequence[int],
                  threads: int = 1) -> ConvergenceReport:
    """|(S_{n, lambda_{n-2}}(z) - S_{n, lambda_n}(z)) / P_n(z)| against 0."""
    z = _check_z(z)
    grid = _check_grid(table, grid)
    values = _map(lambda n: _lemma_value(table, schedule, n, z), grid, threads)
    return ConvergenceReport("lemma1_difference", grid, values, 0.0, schedule.spec, z)


def _strong_value(table: CoeffTable, n: int, z: complex, corrected: bool) -> complex:
    a = quartic_mrs(n)
    P = p_sequence(table, n, z)[n]
    w = phi(z / a)
    # log of D_n(z) / (||P_n|| phi**(n+1/2)), combined before exponentiating
    log_rest = szego_log(n, z, a) - 0.5 * float(table.log_norm_sq[n]) - (n + 0.5) * cmath.log(w)
    if corrected:
        u = cmath.sqrt(z - a) * cmath.sqrt(z + a)
        log_rest += 0.5 * cmath.log(u)
    m = complex(P.mantissa)
    return cmath.exp(complex(P.log_abs() + log_rest.real, cmath.phase(m) + log_rest.imag))


def verify_strong_asymptotics(table: CoeffTable, z, grid: Sequence[int], corrected: bool = False,
                              threads: int = 1) -> ConvergenceReport:
    """P_n(z) D_n(z) / (||P_n|| phi(z/a_n)**(n+1/2)) against 1/sqrt(2 pi).

    ``corrected=True`` multiplies by ``(z**2 - a_n**2)**(1/4)``, the
    Jacobian of the map onto [-a_n, a_n] that the plain quotient omits;
    only that version converges to 1/sqrt(2 pi).
    """
    z = _check_z(z)
    grid = _check_grid(table, grid, low=1)
    values = _map(lambda n: _strong_value(table, n, z, corrected), grid, threads)
    name = "strong_asymptotics_corrected" if corrected else "strong_asymptotics"
    return ConvergenceReport(name, grid, values, INV_SQRT_2PI, None, z)


def _pn_ratio_value(table: CoeffTable, n: int, z: complex) -> complex:
    seq = p_sequence(table, n, z)
    return complex((seq[n - 2] / seq[n]).value()) * math.sqrt(n - 2)


def verify_pn_ratio(table: CoeffTable, z, grid: Sequence[int], threads: int = 1) -> ConvergenceReport:
    """sqrt(n-2) P_{n-2}(z) / P_n(z) against -2 sqrt(3)."""
    z = _check_z(z)
    grid = _check_grid(table, grid)
    values = _map(lambda n: _pn_ratio_value(table, n, z), grid, threads)
    return ConvergenceReport("pn_ratio", grid, values, -TWO_SQRT3, None, z, method="richardson")


def verify_norm_ratio(table: CoeffTable, grid: Sequence[int]) -> ConvergenceReport:
    """sqrt(n) ||P_{n-1}||**2 / ||P_n||**2 = sqrt(n)/b_n against 2 sqrt(3)."""
    grid = _check_grid(table, grid, low=1)
    values = [math.sqrt(n) / float(table.padded[n]) for n in grid]
    return ConvergenceReport("norm_ratio", grid, values, TWO_SQRT3)
