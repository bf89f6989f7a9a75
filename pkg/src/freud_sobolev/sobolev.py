"""Sobolev orthogonal polynomials for <p, q> = int p q w + lam int p' q' w,
w(x) = exp(-x**4).

Because ``P_n' = n P_{n-1} + 4 b_n b_{n-1} b_{n-2} P_{n-3}``, the monic
Sobolev polynomials satisfy the two-term connection

    P_n = S_n + alpha_{n-2} S_{n-2},  n >= 3,

so S_n is stored through its coefficients over the P basis and never in
monomial form (monomial coefficients become useless at moderate degree).
Norms are kept as ``s_m = kappa_m / ||P_m||**2``, which stays O(1) or
O(m**1.5) while ``||P_m||**2`` itself overflows binary64 near m = 600.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Sequence

import mpmath
import numpy as np

from .errors import ArgumentError, NumericError, RangeError, ResolutionError
from .freud_coeffs import CoeffTable, compute_moments
from .poly_engine import PExpansion, ScaledValue, p_sequence
from .precision import Precision
from .quadrature import QuadRule, integrate
from .textio import format_log_value, format_number

__all__ = [
    "LambdaSchedule",
    "SobolevTable",
    "BalanceRecord",
    "build_sobolev_table",
    "eval_s",
    "sobolev_ratio",
    "s_expansion",
    "s_monomial_coefficients",
    "sobolev_inner",
    "gram_schmidt_basis",
    "gram_schmidt_oracle",
    "oracle_connection",
    "balance_diagnostic",
    "s_sweep",
    "write_sobolev_csv",
]

_CRITICAL = -1.5


@dataclass(frozen=True)
class LambdaSchedule:
    """Rule n -> lambda_n.

    ``kind`` is ``power`` (lambda_n = L n**e), ``constant`` (lambda_n = c)
    or ``table`` (explicit values, 1-indexed).
    """

    kind: str
    L: float = 1.0
    e: float = 0.0
    values: tuple = ()
    spec: str = ""

    @classmethod
    def power(cls, L: float, e: float) -> "LambdaSchedule":
        if not L > 0:
            raise ArgumentError(f"power schedule needs L > 0, got {L}")
        return cls("power", float(L), float(e), spec=f"power:{L:g}:{e:g}")

    @classmethod
    def constant(cls, c: float) -> "LambdaSchedule":
        if not c > 0:
            raise ArgumentError(f"constant schedule needs c > 0, got {c}")
        return cls("constant", float(c), 0.0, spec=f"const:{c:g}")

    @classmethod
    def table(cls, values: Sequence[float], spec: str = "table") -> "LambdaSchedule":
        vals = tuple(float(v) for v in values)
        if not vals:
            raise ArgumentError("empty lambda table")
        if min(vals) <= 0:
            raise ArgumentError("lambda table values must be positive")
        return cls("table", values=vals, spec=spec)

    def __call__(self, n: int, precision: Precision | None = None):
        if n < 1:
            raise ArgumentError(f"lambda_n defined for n >= 1, got {n}")
        if self.kind == "power":
            if precision is not None and precision.extended:
                with precision.context():
                    return precision.real(self.L) * precision.power(n, self.e)
            return self.L * float(n) ** self.e
        if self.kind == "constant":
            return precision.real(self.L) if precision is not None else self.L
        if n > len(self.values):
            raise ArgumentError(f"lambda table has {len(self.values)} entries, asked for n={n}")
        v = self.values[n - 1]
        return precision.real(v) if precision is not None else v

    @property
    def classification(self) -> float:
        """L* = lim n**1.5 lambda_n in [0, inf].

        Tables are classified from the slope of log lambda_n against log n
        over the last decade of entries (tolerance 0.05 around -3/2).
        """
        if self.kind == "constant":
            return math.inf
        if self.kind == "power":
            if self.e == _CRITICAL:
                return self.L
            return 0.0 if self.e < _CRITICAL else math.inf
        n = len(self.values)
        if n < 20:
            return math.nan
        lo = max(1, n // 10)
        x = np.log(np.arange(lo, n + 1, dtype=float))
        y = np.log(np.asarray(self.values[lo - 1:], dtype=float))
        slope = np.polyfit(x, y, 1)[0]
        if abs(slope - _CRITICAL) <= 0.05:
            return float(n ** 1.5 * self.values[-1])
        return 0.0 if slope < _CRITICAL else math.inf

    def is_nonincreasing(self, n_max: int) -> bool:
        vals = [self(n) for n in range(1, n_max + 1)]
        return all(a >= b for a, b in zip(vals, vals[1:]))


@dataclass(frozen=True)
class SobolevTable:
    """Norms and connection coefficients of S_{m, lam}, m = 0..n.

    ``s[m] = kappa_m / ||P_m||**2``; ``alpha[j]`` is alpha_j(lam) for
    j = 0..n-2 with ``alpha[0] = 0``.
    """

    lam: object
    n: int
    s: tuple
    log_kappa: tuple
    alpha: tuple
    precision: Precision

    def kappa(self, m: int):
        """``(ln kappa_m, kappa_m)``; the value is None when it overflows."""
        lk = self.log_kappa[m]
        if self.precision.extended:
            with self.precision.context():
                return lk, mpmath.exp(lk)
        return lk, (math.exp(lk) if lk < 709.0 else None)

    def connection(self, m: int) -> list:
        """Coefficients c_k with S_m = sum_k c_k P_{m-2k}, k = 0..m//2.

        c_k = (-1)**k alpha_{m-2} alpha_{m-4} ... (k factors).
        """
        if not 0 <= m <= self.n:
            raise ArgumentError(f"degree {m} outside table range 0..{self.n}")
        c = [self.precision.one()]
        for k in range(1, m // 2 + 1):
            j = m - 2 * k
            c.append(-c[-1] * self.alpha[j] if j >= 0 else 0)
        return c


def build_sobolev_table(table: CoeffTable, lam, n: int) -> SobolevTable:
    """Sobolev norms and connection coefficients at fixed lambda.

    Base cases: ``S_0 = 1``, ``S_1 = x``, ``S_2 = P_2``, so
    ``s_0 = 1``, ``s_1 = 1 + lam/b_1``, ``s_2 = 1 + 4 lam/b_2``. For m >= 3

        s_m = B_m - A_m / s_{m-2}
        B_m = 1 + lam m**2 / b_m + 16 lam b_m b_{m-1} b_{m-2}
        A_m = 16 lam**2 (m-2)**2 b_m b_{m-1}
        alpha_{m-2} = 4 (m-2) lam b_m b_{m-1} / s_{m-2}

    which is the norm recursion written in ratios of ||P_m||**2.
    """
    if not 0 <= n <= table.N:
        raise ArgumentError(f"n={n} outside coefficient table range 0..{table.N}")
    prec = table.precision
    with prec.context():
        lam = prec.real(lam)
        if not lam > 0:
            raise ArgumentError(f"lambda must be positive, got {lam}")
        bb = table.padded
        s = [prec.one()]
        if n >= 1:
            s.append(1 + lam / bb[1])
        if n >= 2:
            s.append(1 + 4 * lam / bb[2])
        alpha = [prec.zero()]
        for m in range(3, n + 1):
            bm, bm1, bm2 = bb[m], bb[m - 1], bb[m - 2]
            prev = s[m - 2]
            B = 1 + lam * m * m / bm + 16 * lam * bm * bm1 * bm2
            A = 16 * lam * lam * (m - 2) ** 2 * bm * bm1
            sm = B - A / prev
            if not sm > 0:
                raise NumericError(f"non-positive Sobolev norm at m={m} (lambda={lam})")
            s.append(sm)
            alpha.append(4 * (m - 2) * lam * bm * bm1 / prev)
        log_kappa = tuple(prec.log(s[m]) + table.log_norm_sq[m] for m in range(n + 1))
        return SobolevTable(lam, n, tuple(s), log_kappa, tuple(alpha[:max(n - 1, 1)]), prec)


def s_sweep(table: CoeffTable, schedule: LambdaSchedule, ns: Sequence[int]) -> dict:
    """s_n(lambda_n) for every n in ``ns``, one table per n.

    In binary64 the recursions for all lambda_n run side by side as a
    numpy vector; the arithmetic per entry is identical to
    :func:`build_sobolev_table`.
    """
    ns = sorted(set(int(n) for n in ns))
    if not ns:
        return {}
    if ns[-1] > table.N or ns[0] < 0:
        raise ArgumentError("sweep degrees outside coefficient table")
    if table.precision.extended:
        return {n: build_sobolev_table(table, schedule(n, table.precision), n).s[n] for n in ns}
    lam = np.array([schedule(max(n, 1)) for n in ns], dtype=float)
    bb = table.padded
    top = ns[-1]
    s_mm2 = np.ones_like(lam)                  # s_0
    s_mm1 = 1 + lam / bb[1] if top >= 1 else None
    hist = {0: s_mm2}
    if top >= 1:
        hist[1] = s_mm1
    if top >= 2:
        hist[2] = 1 + 4 * lam / bb[2]
    want = {n: i for i, n in enumerate(ns)}
    out = {}
    for m in range(0, min(top, 2) + 1):
        if m in want:
            out[m] = float(hist[m][want[m]])
    prev2, prev1 = (hist.get(1), hist.get(2))
    for m in range(3, top + 1):
        bm, bm1, bm2 = bb[m], bb[m - 1], bb[m - 2]
        B = 1 + lam * m * m / bm + 16 * lam * bm * bm1 * bm2
        A = 16 * lam * lam * (m - 2) ** 2 * bm * bm1
        sm = B - A / prev2
        prev2, prev1 = prev1, sm
        if m in want:
            out[m] = float(sm[want[m]])
    return out


def _check_degree(stab: SobolevTable, n: int):
    if not 0 <= n <= stab.n:
        raise ArgumentError(f"degree {n} outside Sobolev table range 0..{stab.n}")


def eval_s(table: CoeffTable, stab: SobolevTable, n: int, z, method: str = "telescope") -> ScaledValue:
    """S_n(z) as a ScaledValue.

    ``telescope`` applies ``S_m = P_m - alpha_{m-2} S_{m-2}`` upward from
    S_0 or S_1; ``connection`` sums ``c_k P_{n-2k}``.
    """
    _check_degree(stab, n)
    P = p_sequence(table, n, z)
    with table.precision.context():
        if method == "telescope":
            m = n % 2
            S = P[m]
            m += 2
            while m <= n:
                S = P[m] - S * stab.alpha[m - 2]
                m += 2
            return S
        if method == "connection":
            acc = ScaledValue.of(0 * P[0].mantissa)
            for k, c in enumerate(stab.connection(n)):
                if c != 0:
                    acc = acc + P[n - 2 * k] * c
            return acc
    raise ArgumentError(f"unknown method {method!r}")


def sobolev_ratio(table: CoeffTable, stab: SobolevTable, n: int, z) -> complex:
    """S_n(z) / P_n(z)."""
    S = eval_s(table, stab, n, z)
    P = p_sequence(table, n, z)[n]
    with table.precision.context():
        return (S / P).value()


def s_expansion(table: CoeffTable, stab: SobolevTable, n: int) -> PExpansion:
    """S_n as a :class:`PExpansion` over P_0..P_n."""
    coeffs = [table.precision.zero()] * (n + 1)
    for k, c in enumerate(stab.connection(n)):
        coeffs[n - 2 * k] = c
    return PExpansion(table, coeffs)


def s_monomial_coefficients(table: CoeffTable, stab: SobolevTable, n: int) -> list:
    """Ascending monomial coefficients of S_n (validation only, n <= 30)."""
    if n > 30:
        raise RangeError("monomial form limited to n <= 30")
    from .poly_engine import monomial_coefficients
    with table.precision.context():
        out = [table.precision.zero()] * (n + 1)
        for k, c in enumerate(stab.connection(n)):
            for i, a in enumerate(monomial_coefficients(table, n - 2 * k)):
                out[i] += c * a
        return out


def _degree(p) -> int:
    d = p.degree
    return d() if callable(d) else d


def sobolev_inner(table: CoeffTable, rule: QuadRule, A, B, lam):
    """``int A B w + lam int A' B' w`` by quadrature (validator only).

    A and B need ``__call__``, ``deriv()`` and ``degree`` (numpy
    ``Polynomial`` or :class:`PExpansion`).
    """
    need = _degree(A) + _degree(B)
    if need > 2 * len(rule) - 1:
        raise ResolutionError(f"{len(rule)}-point rule is exact to degree {2 * len(rule) - 1}, need {need}")
    dA, dB = A.deriv(), B.deriv()
    with table.precision.context():
        first = integrate(lambda x: A(x) * B(x), rule)
        second = integrate(lambda x: dA(x) * dB(x), rule)
        return first + lam * second


# --- extended-precision Gram-Schmidt oracle ---------------------------------

def _gram_matrix(mu, lam, n):
    """``<x**i, x**j>_lam = mu_{i+j} + lam i j mu_{i+j-2}``."""
    G = [[mpmath.mpf(0)] * (n + 1) for _ in range(n + 1)]
    for i in range(n + 1):
        for j in range(i % 2, n + 1, 2):
            g = mu[i + j]
            if i and j:
                g = g + lam * i * j * mu[i + j - 2]
            G[i][j] = g
    return G


def gram_schmidt_basis(lam, n: int, digits: int = 60) -> list:
    """Monic S_0..S_n (ascending monomial coefficients) by Gram-Schmidt.

    Works from exact moments ``Gamma((k+1)/4)/2`` at ``digits`` decimal
    places and is independent of the recurrence coefficients. Classical
    Gram-Schmidt with one reorthogonalization pass; ``G q_j`` is cached so
    each projection costs O(n).
    """
    if n > 30:
        raise RangeError("Gram-Schmidt oracle is limited to n <= 30 (conditioning budget)")
    if digits < 50:
        raise ArgumentError("oracle needs at least 50 digits")
    prec = Precision(digits)
    with prec.context():
        lam = mpmath.mpf(lam)
        mu = compute_moments(2 * n, prec).values
        G = _gram_matrix(mu, lam, n)
        basis, images, norms = [], [], []
        for k in range(n + 1):
            v = [mpmath.mpf(0)] * (n + 1)
            v[k] = mpmath.mpf(1)
            for _pass in range(2):
                # opposite-parity basis vectors are orthogonal by symmetry
                for j in range(k % 2, k, 2):
                    proj = sum(a * b for a, b in zip(v, images[j])) / norms[j]
                    v = [a - proj * b for a, b in zip(v, basis[j])]
            Gv = [sum(G[i][t] * v[t] for t in range(n + 1)) for i in range(n + 1)]
            basis.append(v)
            images.append(Gv)
            norms.append(sum(a * b for a, b in zip(v, Gv)))
        return [b[:k + 1] for k, b in enumerate(basis)]


def gram_schmidt_oracle(lam, n: int, digits: int = 60) -> list:
    """Ascending monic coefficients of S_{n, lam}."""
    return gram_schmidt_basis(lam, n, digits)[n]


def oracle_connection(lam, n: int, digits: int = 60) -> list:
    """Coefficients d_m with P_n = sum_m d_m S_{m, lam}, m = 0..n, from the oracle.

    Only d_n = 1 and d_{n-2} = alpha_{n-2} should be nonzero.
    """
    S = gram_schmidt_basis(lam, n, digits)
    P = gram_schmidt_basis(0, n, digits)[n]
    with mpmath.workdps(digits + 10):
        r = list(P)
        d = [mpmath.mpf(0)] * (n + 1)
        for m in range(n, -1, -1):
            d[m] = r[m]
            r = [a - d[m] * (S[m][i] if i < len(S[m]) else 0) for i, a in enumerate(r)]
        return d


# --- balance diagnostic --------------------------------------------------------

@dataclass(frozen=True)
class BalanceRecord:
    """Split of kappa_n(lambda_n) into its L2 part and its derivative part.

    ``t0``, ``t1`` are expressed in units of ``||P_n||**2`` (the raw values
    overflow binary64 for large n); ``log_norm_sq`` restores them.
    """

    n: int
    lam: float
    t0: float
    t1: float
    s_n: float
    alpha: float
    log_norm_sq: float

    @property
    def ratio(self):
        return self.t1 / self.t0

    @property
    def log_t0(self):
        return math.log(self.t0) + self.log_norm_sq

    @property
    def log_t1(self):
        return math.log(self.t1) + self.log_norm_sq

    @property
    def log_kappa(self):
        return math.log(self.s_n) + self.log_norm_sq


def _balance_parts(table: CoeffTable, stab: SobolevTable, n: int, lam):
    """(t0, t1) / ||P_n||**2 from the connection coefficients.

    t0 uses P-orthogonality of S_n = sum c_k P_{n-2k}; t1 expands S_n' over
    P_{n-1-2j} with the structure relation. With
    ``c^_k = c_k ||P_{n-2k}|| / ||P_n||`` the derivative coefficients are
    ``c^_j (n-2j) / sqrt(b_{n-2j}) + 4 c^_{j-1} sqrt(b_m b_{m-1} b_{m-2})``,
    m = n - 2j + 2.
    """
    bb = table.padded
    prec = table.precision
    chat = [prec.one()]
    for k in range(1, n // 2 + 1):
        j = n - 2 * k
        chat.append(-chat[-1] * stab.alpha[j] / prec.sqrt(bb[j + 2] * bb[j + 1]))
    t0 = sum(c * c for c in chat)
    t1 = prec.zero()
    for j in range(0, (n - 1) // 2 + 1):
        top = n - 2 * j
        d = chat[j] * top / prec.sqrt(bb[top])
        if j >= 1:
            m = top + 2
            d = d + 4 * chat[j - 1] * prec.sqrt(bb[m] * bb[m - 1] * bb[m - 2])
        t1 += d * d
    return t0, lam * t1


def balance_diagnostic(table: CoeffTable, schedule: LambdaSchedule, n: int) -> BalanceRecord:
    if n < 3:
        raise ArgumentError(f"balance diagnostic needs n >= 3, got {n}")
    prec = table.precision
    lam = schedule(n, prec)
    stab = build_sobolev_table(table, lam, n)
    with prec.context():
        t0, t1 = _balance_parts(table, stab, n, stab.lam)
        return BalanceRecord(n, stab.lam, t0, t1, stab.s[n], stab.alpha[n - 2], table.log_norm_sq[n])


def write_sobolev_csv(fh, rows: Sequence[BalanceRecord], digits=None) -> None:
    """CSV ``n,lambda_n,kappa_n,alpha_n,t0,t1,ratio``.

    alpha_n is alpha_{n-2}, the connection coefficient of the row's degree;
    kappa_n, t0 and t1 are absolute values in scientific notation.
    """
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["n", "lambda_n", "kappa_n", "alpha_n", "t0", "t1", "ratio"])
    for r in rows:
        w.writerow([
            r.n,
            format_number(r.lam, digits),
            format_log_value(r.log_kappa),
            format_number(r.alpha, digits),
            format_log_value(r.log_t0),
            format_log_value(r.log_t1),
            format_number(r.ratio, digits),
        ])


def sobolev_rows(table: CoeffTable, lam, n: int) -> list:
    """BalanceRecords for m = 3..n at one fixed lambda (one table)."""
    stab = build_sobolev_table(table, lam, n)
    rows = []
    with table.precision.context():
        for m in range(3, n + 1):
            t0, t1 = _balance_parts(table, stab, m, stab.lam)
            rows.append(BalanceRecord(m, stab.lam, t0, t1, stab.s[m], stab.alpha[m - 2],
                                      table.log_norm_sq[m]))
    return rows
