import io
import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from freud_sobolev.errors import ArgumentError, RangeError, ResolutionError
from freud_sobolev.poly_engine import PExpansion, p_sequence
from freud_sobolev.quadrature import gauss_freud
from freud_sobolev.sobolev import (LambdaSchedule, balance_diagnostic, build_sobolev_table, eval_s,
                                   gram_schmidt_basis, gram_schmidt_oracle, oracle_connection,
                                   s_expansion, s_monomial_coefficients, s_sweep, sobolev_inner,
                                   sobolev_ratio, sobolev_rows, write_sobolev_csv)

from conftest import MU0, MU2

# extended-precision Gram-Schmidt values (lambda = 1)
ALPHA1_LAM1 = "0.20500807980925167304"
S4_AT_2I_LAM1 = 22.074493753600770963

LAMS = (1e-3, 1.0, 1e3)
SCHEDULES = (LambdaSchedule.power(1, -1.5), LambdaSchedule.power(1, -2), LambdaSchedule.constant(1))
off_axis = st.builds(complex, st.floats(-2, 2), st.floats(0.1, 2))


# --- schedules ----------------------------------------------------------------

def test_schedule_values():
    s = LambdaSchedule.power(2, -1.5)
    assert s(4) == pytest.approx(2 / 8)
    assert LambdaSchedule.constant(3)(1000) == 3
    t = LambdaSchedule.table([3, 2, 1])
    assert t(2) == 2
    with pytest.raises(ArgumentError):
        t(4)
    with pytest.raises(ArgumentError):
        s(0)


@pytest.mark.parametrize("sched,L", [
    (LambdaSchedule.power(1, -1.5), 1.0),
    (LambdaSchedule.power(2.5, -1.5), 2.5),
    (LambdaSchedule.power(2, -2), 0.0),
    (LambdaSchedule.power(1, -1), math.inf),
    (LambdaSchedule.constant(1), math.inf),
])
def test_classification(sched, L):
    assert sched.classification == L


def test_table_classification():
    n = np.arange(1, 2001)
    assert LambdaSchedule.table(3 * n ** -1.5).classification == pytest.approx(3)
    assert LambdaSchedule.table(n ** -2.0).classification == 0
    assert LambdaSchedule.table(1 / np.sqrt(n)).classification == math.inf


def test_schedule_rejects_nonpositive():
    with pytest.raises(ArgumentError):
        LambdaSchedule.power(0, -1)
    with pytest.raises(ArgumentError):
        LambdaSchedule.table([1, 0, 2])


def test_nonincreasing():
    assert all(s.is_nonincreasing(200) for s in SCHEDULES)


# --- construction -------------------------------------------------------------

def test_base_cases(small_table):
    lam = 0.37
    stab = build_sobolev_table(small_table, lam, 10)
    assert stab.s[0] == 1
    assert math.exp(stab.log_kappa[1]) == pytest.approx(MU2 + lam * MU0, rel=1e-14)
    k2 = math.exp(small_table.log_norm_sq[2]) + 4 * lam * MU2
    assert math.exp(stab.log_kappa[2]) == pytest.approx(k2, rel=1e-14)
    assert stab.alpha[0] == 0


def test_alpha1_oracle(small_table):
    stab = build_sobolev_table(small_table, 1.0, 5)
    assert stab.alpha[1] == pytest.approx(float(ALPHA1_LAM1), rel=1e-13)
    b = small_table.padded
    assert stab.alpha[1] == pytest.approx(4 * MU0 * b[1] * b[2] * b[3] / (MU2 + MU0), rel=1e-13)


def test_small_lambda_limit(small_table):
    stab = build_sobolev_table(small_table, 1e-14, 100)
    assert max(stab.alpha) < 1e-10
    assert max(abs(s - 1) for s in stab.s) < 1e-9


def test_degree_two_independent_of_lambda():
    ref = gram_schmidt_oracle(0.01, 2)
    for lam in (1, 100):
        c = gram_schmidt_oracle(lam, 2)
        assert all(abs(a - b) < mpmath.mpf(10) ** -55 for a, b in zip(c, ref))
    with mpmath.workdps(60):
        assert abs(ref[0] + mpmath.gamma(0.75) / mpmath.gamma(0.25)) < mpmath.mpf(10) ** -55


def test_oracle_trivial_cases():
    assert gram_schmidt_oracle(3, 0) == [1]
    c = gram_schmidt_oracle(10, 5)
    assert all(c[k] == 0 for k in (0, 2, 4)) and c[5] == 1
    with pytest.raises(RangeError):
        gram_schmidt_oracle(1, 31)
    with pytest.raises(ArgumentError):
        gram_schmidt_oracle(1, 4, digits=30)


@pytest.mark.parametrize("lam", LAMS)
def test_monic_coefficients_match_oracle(ext_table, lam):
    stab = build_sobolev_table(ext_table, lam, 24)
    basis = gram_schmidt_basis(lam, 24)
    for n in range(25):
        ours = s_monomial_coefficients(ext_table, stab, n)
        for a, b in zip(ours, basis[n]):
            if b != 0:
                assert abs(a / b - 1) < 1e-9
            else:
                assert a == 0


@pytest.mark.parametrize("lam", LAMS)
def test_two_term_truncation(lam):
    for n in (6, 15, 24):
        d = oracle_connection(lam, n)
        scale = max(abs(x) for x in d)
        assert all(abs(d[m]) <= 1e-12 * scale for m in range(n - 2))
        assert d[n - 1] == 0 and d[n] == 1


def test_two_term_alpha_matches(ext_table):
    lam = 2.5
    stab = build_sobolev_table(ext_table, lam, 20)
    d = oracle_connection(lam, 20)
    assert abs(d[18] / stab.alpha[18] - 1) < 1e-40


def test_out_of_range(small_table):
    with pytest.raises(ArgumentError):
        build_sobolev_table(small_table, 1.0, small_table.N + 1)
    with pytest.raises(ArgumentError):
        build_sobolev_table(small_table, -1.0, 10)


@pytest.mark.parametrize("lam", [1e-4, 0.3, 1.0, 50.0])
def test_table_invariants(table, lam):
    stab = build_sobolev_table(table, lam, 4096)
    b = table.padded
    assert all(a > 0 for a in stab.alpha[1:])
    for m in range(3, 4097):
        lower = 1 + lam * m * m / b[m]
        upper = 1 + lam * (m * m / b[m] + 16 * b[m] * b[m - 1] * b[m - 2])
        assert lower <= stab.s[m] <= upper
    for m in (3, 10, 11):
        c = stab.connection(m)
        # the P_0 coefficient of an even degree carries alpha_0 = 0
        assert all((-1) ** k * ck > 0 for k, ck in enumerate(c) if m - 2 * k > 0)


def test_monotone_in_lambda(table):
    lams = [1e-3, 1e-2, 0.1, 1, 10]
    s = [build_sobolev_table(table, lam, 1000).s for lam in lams]
    for m in range(1, 1001):
        assert all(a[m] <= b[m] for a, b in zip(s, s[1:]))


@pytest.mark.parametrize("sched", SCHEDULES)
def test_sweep_sandwich(table, sched):
    ns = range(3, 4097)
    s = s_sweep(table, sched, ns)
    b = table.padded
    for n in ns:
        lam = sched(n)
        assert 1 + lam * n * n / b[n] <= s[n] <= 1 + lam * (n * n / b[n] + 16 * b[n] * b[n - 1] * b[n - 2])


def test_sweep_matches_single_builds(table):
    sched = LambdaSchedule.power(1, -1.5)
    s = s_sweep(table, sched, [17, 300, 2048])
    for n in (17, 300, 2048):
        assert s[n] == build_sobolev_table(table, sched(n), n).s[n]


# --- evaluation -----------------------------------------------------------------

def test_s1_is_z(small_table):
    stab = build_sobolev_table(small_table, 7.0, 5)
    assert eval_s(small_table, stab, 1, 0.3 + 0.2j).value() == 0.3 + 0.2j


def test_s4_oracle(small_table):
    stab = build_sobolev_table(small_table, 1.0, 10)
    v = eval_s(small_table, stab, 4, 2j).value()
    assert abs(v - S4_AT_2I_LAM1) <= 1e-10 * S4_AT_2I_LAM1


@settings(max_examples=40, deadline=None)
@given(n=st.integers(0, 2000), z=off_axis, lam=st.floats(1e-4, 1e2))
def test_paths_agree_and_parity(table, n, z, lam):
    stab = build_sobolev_table(table, lam, max(n, 3))
    a = eval_s(table, stab, n, z)
    b = eval_s(table, stab, n, z, method="connection")
    assert abs((a / b).value() - 1) <= 1e-12
    c = eval_s(table, stab, n, -z)
    assert abs((c / a).value() - (-1) ** n) <= 1e-12


def test_ratio_finite_at_large_degree(table):
    stab = build_sobolev_table(table, 1.0, 8192)
    r = sobolev_ratio(table, stab, 8192, 2j)
    assert 1 < r.real < 1.5


def test_eval_range(small_table):
    stab = build_sobolev_table(small_table, 1.0, 10)
    with pytest.raises(ArgumentError):
        eval_s(small_table, stab, 11, 1j)


# --- quadrature validation --------------------------------------------------------

@pytest.fixture(scope="module")
def ext_rule(ext_table):
    return gauss_freud(ext_table, 40)


@pytest.mark.parametrize("lam", [1e-3, 1.0, 1e3])
def test_orthogonality_and_norms(ext_table, ext_rule, lam):
    stab = build_sobolev_table(ext_table, lam, 30)
    S = [s_expansion(ext_table, stab, n) for n in range(31)]
    with ext_table.precision.context():
        kap = [mpmath.exp(v) for v in stab.log_kappa]
        for n in range(0, 31, 3):
            assert abs(sobolev_inner(ext_table, ext_rule, S[n], S[n], lam) / kap[n] - 1) < 1e-10
            for m in range(n % 2, n, 2):
                ip = sobolev_inner(ext_table, ext_rule, S[n], S[m], lam)
                assert abs(ip) / mpmath.sqrt(kap[n] * kap[m]) <= 1e-10


def test_p_norm_in_sobolev_product(ext_table, ext_rule):
    lam = 0.8
    b = ext_table.padded
    with ext_table.precision.context():
        for n in (3, 9, 20):
            P = PExpansion(ext_table, [0] * n + [1])
            nrm = lambda k: mpmath.exp(ext_table.log_norm_sq[k])
            expected = nrm(n) + lam * (n * n * nrm(n - 1) + 16 * nrm(n) ** 2 / nrm(n - 3))
            got = sobolev_inner(ext_table, ext_rule, P, P, lam)
            assert abs(got / expected - 1) < 1e-10
            # upper end of the sandwich is this norm
            assert mpmath.exp(build_sobolev_table(ext_table, lam, n).log_kappa[n]) <= got


def test_extremality(ext_table, ext_rule):
    rng = np.random.default_rng(20261016)
    lam = 2.0
    stab = build_sobolev_table(ext_table, lam, 30)
    with ext_table.precision.context():
        for n in (4, 11, 30):
            kappa = mpmath.exp(stab.log_kappa[n])
            base = s_expansion(ext_table, stab, n).coeffs
            for _ in range(20):
                eps = 10.0 ** rng.uniform(-6, 0)
                pert = [mpmath.mpf(c) + (eps * rng.normal() if k < n else 0) for k, c in enumerate(base)]
                Q = PExpansion(ext_table, pert)
                assert sobolev_inner(ext_table, ext_rule, Q, Q, lam) >= kappa


def test_numpy_polynomial_input(small_table):
    rule = gauss_freud(small_table, 6)
    A = np.polynomial.Polynomial([0, 1])
    assert sobolev_inner(small_table, rule, A, A, 2.0) == pytest.approx(MU2 + 2 * MU0, rel=1e-13)


def test_rule_too_small(small_table):
    stab = build_sobolev_table(small_table, 1.0, 10)
    S = s_expansion(small_table, stab, 10)
    with pytest.raises(ResolutionError):
        sobolev_inner(small_table, gauss_freud(small_table, 10), S, S, 1.0)


# --- balance -------------------------------------------------------------------

@pytest.mark.parametrize("sched", SCHEDULES)
def test_balance_sum(table, sched):
    for n in (3, 4, 64, 1001, 4096):
        r = balance_diagnostic(table, sched, n)
        assert r.t0 > 0 and r.t1 > 0
        assert abs((r.t0 + r.t1) / r.s_n - 1) <= 1e-10


def test_balance_extended(ext_table):
    r = balance_diagnostic(ext_table, LambdaSchedule.power(1, -1.5), 60)
    with ext_table.precision.context():
        assert abs((r.t0 + r.t1) / r.s_n - 1) < mpmath.mpf(10) ** -50


def test_balance_regimes(table):
    ratio = lambda sched, n: balance_diagnostic(table, sched, n).ratio
    for n in (64, 256, 1024, 4096):
        assert 0.1 <= ratio(LambdaSchedule.power(1, -1.5), n) <= 10
    assert ratio(LambdaSchedule.power(1, -2), 4096) < min(0.1, ratio(LambdaSchedule.power(1, -2), 64))
    assert ratio(LambdaSchedule.constant(1), 4096) > max(10, ratio(LambdaSchedule.constant(1), 64))


def test_balance_needs_degree_three(table):
    with pytest.raises(ArgumentError):
        balance_diagnostic(table, LambdaSchedule.constant(1), 2)


def test_csv_roundtrip(table):
    rows = sobolev_rows(table, 0.5, 1200)
    buf = io.StringIO()
    write_sobolev_csv(buf, rows)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "n,lambda_n,kappa_n,alpha_n,t0,t1,ratio"
    assert len(lines) == 1 + len(rows)
    last = lines[-1].split(",")
    r = rows[-1]
    assert int(last[0]) == 1200 and float(last[1]) == 0.5
    assert float(last[3]) == r.alpha and float(last[6]) == r.ratio
    # kappa_n overflows binary64; the text keeps mantissa and exponent
    assert mpmath.log(mpmath.mpf(last[2])) == pytest.approx(r.log_kappa, rel=1e-14)
