"""Moments and recurrence coefficients for the quartic Freud weight.

The monic orthogonal polynomials for ``exp(-x**4) dx`` satisfy

    P_{n+1}(x) = x P_n(x) - b_n P_{n-1}(x),    b_n = ||P_n||^2 / ||P_{n-1}||^2,

and the b_n obey the string (Freud) equation

    4 b_n (b_{n-1} + b_n + b_{n+1}) = n,   b_0 = 0.

Running that equation forward from b_1 amplifies rounding errors by a
factor of about ``2 + sqrt(3)`` per step, so it is solved here as a
two-point boundary value problem with Newton's method instead.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import ArgumentError, ConvergenceError, ResolutionError
from .precision import STD, Precision, ext
from .textio import format_number

__all__ = [
    "MomentTable",
    "CoeffTable",
    "compute_moments",
    "solve_string_system",
    "stieltjes_oracle",
    "norm_sq",
    "string_residuals",
    "truncation_radius",
]

# decay rate of a boundary perturbation into the interior (root of r^2 + 4r + 1)
_BACKWARD_DECAY = 2.0 + math.sqrt(3.0)


@dataclass(frozen=True)
class MomentTable:
    """mu_k = integral of x**k exp(-x**4) over the real line, k = 0..K."""

    values: tuple
    precision: Precision = STD

    def __getitem__(self, k):
        return self.values[k]

    def __len__(self):
        return len(self.values)


def compute_moments(K: int, precision: Precision = STD) -> MomentTable:
    """Moments mu_0..mu_K of ``exp(-x**4)``.

    mu_0 = Gamma(1/4)/2 and mu_2 = Gamma(3/4)/2 seed the integration-by-parts
    recursion ``mu_{k+4} = (k+1)/4 * mu_k``; odd moments vanish.
    """
    if K < 0:
        raise ArgumentError(f"K must be non-negative, got {K}")
    prec = precision
    with prec.context():
        mu = [prec.zero()] * (K + 1)
        quarter = prec.real(1) / 4
        mu[0] = prec.gamma(quarter) / 2
        if K >= 2:
            mu[2] = prec.gamma(3 * quarter) / 2
        for k in range(0, K - 3, 2):
            mu[k + 4] = (k + 1) * mu[k] / 4
        return MomentTable(tuple(mu), prec)


@dataclass(frozen=True)
class CoeffTable:
    """Recurrence coefficients b_1..b_N and ln||P_n||^2 for n = 0..N.

    Instances are immutable and safe to share between threads.
    """

    b: tuple
    log_norm_sq: tuple
    precision: Precision = STD
    source: str = field(default="string", compare=False)

    @property
    def N(self) -> int:
        return len(self.b)

    @property
    def precision_tag(self) -> str:
        return self.precision.tag

    @cached_property
    def padded(self) -> tuple:
        """``(b_0, b_1, ..., b_N)`` with b_0 = 0, so ``padded[n] == b_n``."""
        return (self.precision.zero(),) + tuple(self.b)

    @property
    def mu0(self):
        with self.precision.context():
            return self.precision.exp(self.log_norm_sq[0])

    def bn(self, n: int):
        if not 0 <= n <= self.N:
            raise ArgumentError(f"b_{n} outside table range 0..{self.N}")
        return self.padded[n]

    def log_norm_ratio(self, n: int, m: int):
        """ln(||P_n||^2 / ||P_m||^2)."""
        return self.log_norm_sq[n] - self.log_norm_sq[m]

    def truncated(self, N: int) -> "CoeffTable":
        if not 1 <= N <= self.N:
            raise ArgumentError(f"cannot truncate table of length {self.N} to {N}")
        return CoeffTable(self.b[:N], self.log_norm_sq[:N + 1], self.precision, self.source)

    def write_csv(self, fh) -> None:
        """CSV with header ``n,b_n,log_norm_sq``, one row per n = 1..N."""
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["n", "b_n", "log_norm_sq"])
        d = self.precision.digits
        for n in range(1, self.N + 1):
            w.writerow([n, format_number(self.b[n - 1], d), format_number(self.log_norm_sq[n], d)])


def _table_from_b(b, mu0, prec: Precision, source: str) -> CoeffTable:
    logs = [prec.log(mu0)]
    for bk in b:
        logs.append(logs[-1] + prec.log(bk))
    return CoeffTable(tuple(b), tuple(logs), prec, source)


def string_residuals(table: CoeffTable) -> list:
    """``4 b_n (b_{n-1} + b_n + b_{n+1}) - n`` for n = 1..N-1."""
    bb = table.padded
    with table.precision.context():
        return [4 * bb[n] * (bb[n - 1] + bb[n] + bb[n + 1]) - n for n in range(1, table.N)]


def _solve_tridiagonal(sub, diag, sup, rhs):
    """Thomas algorithm; works for floats and mpmath numbers alike."""
    n = len(diag)
    c = [None] * n
    d = [None] * n
    c[0] = sup[0] / diag[0]
    d[0] = rhs[0] / diag[0]
    for i in range(1, n):
        den = diag[i] - sub[i] * c[i - 1]
        c[i] = sup[i] / den if i < n - 1 else 0
        d[i] = (rhs[i] - sub[i] * d[i - 1]) / den
    x = [None] * n
    x[-1] = d[-1]
    for i in range(n - 2, -1, -1):
        x[i] = d[i] - c[i] * x[i + 1]
    return x


def _padding(prec: Precision) -> int:
    digits = prec.digits if prec.extended else 16
    return int(math.ceil(digits * math.log(10) / math.log(_BACKWARD_DECAY))) + 16


def solve_string_system(N: int, tol=None, precision: Precision = STD, *,
                        max_iter: int = 60) -> CoeffTable:
    """Solve the quartic string equation for b_1..b_N.

    b_1 = mu_2/mu_0 is pinned from the moments and the top of the system is
    closed with the Freud asymptote b_{M+1} = sqrt((M+1)/12), where
    ``M = N + pad``. The closure error decays like ``(2+sqrt(3))**-(M-n)``
    into the interior, so the padding keeps it below working precision for
    every returned coefficient. The tridiagonal Newton system is solved
    from the initial guess ``b_n = sqrt(n/12)``; a step that increases the
    residual or produces a non-positive coefficient is halved.

    Parameters
    ----------
    N : int
        Number of coefficients to return (N >= 2).
    tol : real, optional
        Bound on ``max_n |4 b_n (b_{n-1}+b_n+b_{n+1}) - n|``. Defaults to
        1e-9 in binary64 and ``10**-digits`` in extended mode.
    precision : Precision
        Arithmetic mode.

    Raises
    ------
    ConvergenceError
        If Newton's method stalls; ``err.residual`` holds the last residual.
    """
    if N < 2:
        raise ArgumentError(f"N must be at least 2, got {N}")
    prec = precision
    with prec.context():
        if tol is None:
            tol = 1e-9 if not prec.extended else prec.real(10) ** (-prec.digits)
        tol = prec.real(tol)
        mom = compute_moments(2, prec)
        M = N + _padding(prec)
        b = [prec.zero()] * (M + 2)
        b[1] = mom[2] / mom[0]
        for n in range(2, M + 2):
            b[n] = prec.sqrt(prec.real(n) / 12)

        def residual(bv):
            return [4 * bv[n] * (bv[n - 1] + bv[n] + bv[n + 1]) - n for n in range(2, M + 1)]

        F = residual(b)
        fnorm = max(abs(f) for f in F)
        polish = 0
        for _ in range(max_iter):
            # once below tol, keep stepping while the residual still drops
            # (quadratic convergence: one or two steps reach rounding level)
            if fnorm <= tol:
                if polish == 2:
                    break
                polish += 1
            # unknowns b_2..b_M; rows n = 2..M
            sub = [4 * b[n] if n > 2 else 0 for n in range(2, M + 1)]
            diag = [4 * (b[n - 1] + 2 * b[n] + b[n + 1]) for n in range(2, M + 1)]
            sup = [4 * b[n] if n < M else 0 for n in range(2, M + 1)]
            delta = _solve_tridiagonal(sub, diag, sup, [-f for f in F])
            step = prec.one()
            for _halving in range(40):
                trial = list(b)
                for i, d in enumerate(delta):
                    trial[i + 2] = b[i + 2] + step * d
                if min(trial[2:M + 1]) > 0:
                    Ft = residual(trial)
                    ft = max(abs(f) for f in Ft)
                    if ft < fnorm or (ft <= tol and not polish):
                        break
                step = step / 2
            else:
                if polish:
                    break
                raise ConvergenceError("string system: step halving exhausted", float(fnorm))
            if polish and not ft < fnorm:
                break
            b, F, fnorm = trial, Ft, ft
        else:
            raise ConvergenceError(
                f"string system did not converge in {max_iter} iterations", float(fnorm))

        table = _table_from_b(b[1:N + 1], mom[0], prec, "string")
        res = string_residuals(table)
        worst = max(abs(r) for r in res) if res else prec.zero()
        if worst > tol:
            raise ConvergenceError("string residual above tolerance after truncation", float(worst))
        return table


def truncation_radius(N: int, eps) -> float:
    """Half-width R of [-R, R] beyond which ``x**(2N) exp(-x**4)`` is below eps.

    Fixed point of ``R = (ln(1/eps) + (2N+2) ln R)**(1/4)``, two iterations
    from ``R = ln(1/eps)**(1/4)``.
    """
    L = -math.log(float(eps))
    R = L ** 0.25
    for _ in range(2):
        R = (L + (2 * N + 2) * math.log(R)) ** 0.25
    return R


def stieltjes_oracle(N: int, rule_size: int | None = None,
                     precision: Precision | None = None) -> CoeffTable:
    """Discretized Stieltjes procedure for b_1..b_N.

    ``exp(-x**4) dx`` is replaced by the trapezoidal rule with ``rule_size``
    points on [-R, R] (see :func:`truncation_radius`). For this entire,
    super-exponentially decaying integrand the trapezoidal rule converges
    geometrically in the number of points. The procedure is run on
    orthonormal vectors to avoid overflow; the diagonal recurrence
    coefficients vanish by symmetry of the nodes and are not formed.

    Independent of :func:`solve_string_system`; defaults to extended
    precision.
    """
    if N < 1:
        raise ArgumentError(f"N must be positive, got {N}")
    if rule_size is None:
        rule_size = max(8 * N, 400)
    if rule_size < 4 * N:
        raise ResolutionError(f"rule_size {rule_size} < 4N = {4 * N}")
    prec = ext() if precision is None else precision
    with prec.context():
        R = prec.real(truncation_radius(N, prec.eps))
        m = rule_size
        h = 2 * R / (m - 1)
        x = [-R + k * h for k in range(m)]
        w = [h * prec.exp(-(xk ** 4)) for xk in x]
        w[0] /= 2
        w[-1] /= 2
        # symmetric grid: enforce exact mirror symmetry against rounding
        for k in range(m // 2):
            x[m - 1 - k] = -x[k]
            w[m - 1 - k] = w[k]
        if m % 2:
            x[m // 2] = prec.zero()

        dtype = object if prec.extended else float
        X = np.array(x, dtype=dtype)
        W = np.array(w, dtype=dtype)
        mu0 = sum(w)
        q_prev = np.zeros(m, dtype=dtype)
        q = np.array([1 / prec.sqrt(mu0)] * m, dtype=dtype)
        beta_prev = prec.zero()
        b = []
        for _ in range(N):
            v = X * q - beta_prev * q_prev
            beta = prec.sqrt(sum(W * v * v))
            b.append(beta * beta)
            q_prev, q = q, v / beta
            beta_prev = beta
        return _table_from_b(b, mu0, prec, "stieltjes")


def norm_sq(table: CoeffTable, n: int):
    """Return ``(ln||P_n||^2, ||P_n||^2)``; the second entry is None on overflow."""
    if not 0 <= n <= table.N:
        raise ArgumentError(f"n={n} outside table range 0..{table.N}")
    log_value = table.log_norm_sq[n]
    if table.precision.extended:
        with table.precision.context():
            return log_value, table.precision.exp(log_value)
    if log_value > 709.0:
        return log_value, None
    return log_value, math.exp(log_value)
