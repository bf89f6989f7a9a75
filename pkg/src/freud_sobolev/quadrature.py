"""Gauss rules for exp(-x**4) dx and first-kind Chebyshev rules."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import mpmath
import numpy as np
from scipy.linalg import eigh_tridiagonal

from .errors import ArgumentError, EvaluationError, NumericError
from .freud_coeffs import CoeffTable

__all__ = ["QuadRule", "gauss_freud", "gauss_chebyshev", "integrate"]

FREUD_QUARTIC = "freud_quartic"
CHEBYSHEV_FIRST_KIND = "chebyshev_first_kind"


@dataclass(frozen=True)
class QuadRule:
    nodes: tuple
    weights: tuple
    measure_tag: str

    def __len__(self):
        return len(self.nodes)


def _symmetrize(x, w):
    m = len(x)
    for k in range(m // 2):
        x[m - 1 - k] = -x[k]
        w[m - 1 - k] = w[k]
    if m % 2:
        x[m // 2] = 0 * x[m // 2]
    return x, w


def gauss_freud(table: CoeffTable, m: int) -> QuadRule:
    """m-point Gauss rule for ``exp(-x**4) dx`` (Golub-Welsch).

    The Jacobi matrix has zero diagonal and off-diagonal ``sqrt(b_k)``,
    k = 1..m-1; weights are ``mu_0`` times the squared first components of
    the normalized eigenvectors. Nodes are mirrored so the rule is exactly
    symmetric.
    """
    if m < 1 or m > table.N + 1:
        raise ArgumentError(f"m={m} needs 1 <= m <= N+1 = {table.N + 1}")
    prec = table.precision
    if m == 1:
        return QuadRule((prec.zero(),), (table.mu0,), FREUD_QUARTIC)
    if prec.extended:
        with prec.context():
            J = mpmath.zeros(m, m)
            for k in range(1, m):
                s = mpmath.sqrt(table.bn(k))
                J[k - 1, k] = J[k, k - 1] = s
            try:
                E, Q = mpmath.eigsy(J)
            except Exception as exc:  # mpmath raises plain exceptions on stall
                raise NumericError(f"eigensolver failed: {exc}") from exc
            mu0 = table.mu0
            pairs = sorted((E[k], mu0 * Q[0, k] ** 2) for k in range(m))
            x = [p[0] for p in pairs]
            w = [p[1] for p in pairs]
            x, w = _symmetrize(x, w)
            return QuadRule(tuple(x), tuple(w), FREUD_QUARTIC)
    off = np.sqrt(np.asarray(table.b[:m - 1], dtype=float))
    try:
        x, V = eigh_tridiagonal(np.zeros(m), off)
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"eigensolver failed: {exc}") from exc
    w = table.mu0 * V[0, :] ** 2
    x, w = _symmetrize(list(map(float, x)), list(map(float, w)))
    return QuadRule(tuple(x), tuple(w), FREUD_QUARTIC)


def gauss_chebyshev(m: int) -> QuadRule:
    """Gauss rule for ``dt / sqrt(1 - t**2)`` on [-1, 1]; weights pi/m."""
    if m < 1:
        raise ArgumentError(f"m must be positive, got {m}")
    x = [-math.cos((2 * k - 1) * math.pi / (2 * m)) for k in range(1, m + 1)]
    w = [math.pi / m] * m
    x, w = _symmetrize(x, w)
    return QuadRule(tuple(x), tuple(w), CHEBYSHEV_FIRST_KIND)


def _finite(v) -> bool:
    if isinstance(v, (mpmath.mpf, mpmath.mpc)):
        return bool(mpmath.isfinite(v))
    return cmath.isfinite(complex(v))


def integrate(f, rule: QuadRule):
    """``sum_k w_k f(x_k)`` accumulated in ascending node order.

    Returns a real when every ``f(x_k)`` is real, otherwise a complex.
    """
    total = 0
    for x, w in zip(rule.nodes, rule.weights):
        v = f(x)
        if not _finite(v):
            raise EvaluationError(f"integrand not finite at node x={x!r}: {v!r}")
        total = total + w * v
    return total
