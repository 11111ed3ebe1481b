import itertools
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import cube_grid, monotone_grid, risk_rows
from nested_ma.candidates import AssumptionReport, check_assumptions
from nested_ma.errors import DimensionMismatch, InvalidParams, PhiZero
from nested_ma.oracle import (
    SignalDecomposition,
    block_snr,
    bound_corollary41,
    bound_theorem41,
    bound_theorem42,
    ma_risk,
    min_loss_over_simplex,
    optimal_relaxed_risk,
    optimal_simplex_risk,
    reduce_to_mt,
    regroup,
    signal_decompose,
    snr_diagnostics,
)
from nested_ma.spectral import NestedModelSet, decompose, orthogonalize, reconstruct
from nested_ma.weights import (
    PenaltySchedule,
    antitonic_quadratic,
    gamma_from_weights,
    in_simplex,
    penalty_schedule,
    solve_relaxed,
)


def sig_from(energy, sizes, sigma2=1.0, tail=0.0):
    sizes = tuple(sizes)
    return SignalDecomposition.from_energies(energy, NestedModelSet(sizes, sizes[-1]), sigma2, tail)


def monotone_oracle(sig):
    """Exact simplex optimum by a direct antitonic fit of the risk in gamma form."""
    e, v = sig.mu_energy, sig.block_noise
    g = antitonic_quadratic(e, e + v, 0.0, 1.0, pin_first=1.0)
    return ma_risk(sig, g)


def feasible(snr_tail):
    return all(a >= b for a, b in zip(snr_tail, snr_tail[1:]))


def subsets_with_endpoints(sizes):
    inner = sizes[1:-1]
    for r in range(len(inner) + 1):
        for keep in itertools.combinations(inner, r):
            yield (sizes[0],) + keep + (sizes[-1],)


@st.composite
def signals(draw, max_m=6):
    M = draw(st.integers(1, max_m))
    d = draw(st.lists(st.integers(1, 6), min_size=M, max_size=M))
    e = draw(st.lists(st.one_of(st.just(0.0), st.floats(0.01, 30.0)), min_size=M, max_size=M))
    sizes = tuple(np.cumsum(d))
    return sig_from(e, sizes, draw(st.floats(0.2, 3.0)), draw(st.floats(0.0, 2.0)))


# -- decomposition and risk identity -------------------------------------------------

def test_signal_decompose_examples(rng):
    X = rng.standard_normal((15, 5))
    basis = orthogonalize(X)
    ms = NestedModelSet((2, 4, 5), 5)
    zero = signal_decompose(basis, np.zeros(15), ms, 1.0)
    assert np.all(zero.mu_energy == 0) and zero.mu_tail == 0
    mu = X[:, :2] @ np.array([1.0, 2.0])
    s = signal_decompose(basis, mu, ms, 1.0)
    assert np.allclose(s.mu_energy, [mu @ mu, 0, 0], atol=1e-10)
    assert s.mu_tail == pytest.approx(0.0, abs=1e-9)
    mu = rng.standard_normal(15)
    s = signal_decompose(basis, mu, ms, 2.0)
    assert s.mu_energy.sum() + s.mu_tail == pytest.approx(mu @ mu, rel=1e-8)
    assert np.allclose(s.block_noise, [4, 4, 2])
    with pytest.raises(DimensionMismatch):
        signal_decompose(basis, np.zeros(14), ms, 1.0)


def test_ma_risk_extremes():
    sig = sig_from([3.0, 1.0, 0.5], (2, 5, 6), sigma2=0.5, tail=0.7)
    assert ma_risk(sig, np.ones(3)) == pytest.approx(0.5 * 6 + 0.7)
    assert ma_risk(sig, np.zeros(3)) == pytest.approx(4.5 + 0.7)
    with pytest.raises(DimensionMismatch):
        ma_risk(sig, np.ones(2))


def test_signal_validation():
    with pytest.raises(InvalidParams):
        sig_from([-1.0], (1,))
    with pytest.raises(DimensionMismatch):
        sig_from([1.0, 2.0], (1,))


def test_zero_signal_snr_is_zero():
    assert np.all(block_snr([0.0, 2.0], [1.0, 4.0]) == [0.0, 0.5])


def test_ma_risk_matches_monte_carlo(rng):
    n, p, R = 40, 8, 1500
    X = rng.standard_normal((n, p))
    basis = orthogonalize(X)
    ms = NestedModelSet((2, 4, 8), p)
    mu = X @ (1 / np.arange(1, p + 1)) + 0.3 * rng.standard_normal(n)
    sig = signal_decompose(basis, mu, ms, 1.0)
    g = np.array([1.0, 0.6, 0.2])
    losses = np.empty(R)
    for r in range(R):
        y = mu + rng.standard_normal(n)
        fit = reconstruct(basis, decompose(basis, y, ms, 1.0), ms, g)
        losses[r] = np.sum((fit - mu) ** 2)
    se = losses.std(ddof=1) / math.sqrt(R)
    assert abs(losses.mean() - ma_risk(sig, g)) < 3 * se


# -- optimal risks -------------------------------------------------------------------

def test_relaxed_examples():
    sig = sig_from([1.0, 3.0], (1, 4), tail=0.4)
    risk, g = optimal_relaxed_risk(sig)
    assert risk == pytest.approx(0.5 * 4 + 0.4)
    assert np.allclose(g, 0.5)
    risk, g = optimal_relaxed_risk(sig_from([0.0, 0.0], (1, 2)))
    assert risk == 0.0 and np.all(g == 0)


def test_relaxed_matches_coordinate_grid(rng):
    grid = np.arange(0, 1.0005, 1e-3)
    for _ in range(5):
        sig = sig_from(rng.uniform(0, 5, 4), (1, 3, 4, 7), sigma2=0.7, tail=0.2)
        risk, g = optimal_relaxed_risk(sig)
        e, v = sig.mu_energy, sig.block_noise
        per = e[:, None] * (1 - grid) ** 2 + v[:, None] * grid**2
        assert per.min(axis=1).sum() + sig.mu_tail == pytest.approx(risk, abs=1e-5)
        assert ma_risk(sig, g) == pytest.approx(risk, abs=1e-12)


def test_single_model_simplex_risk():
    risk, w = optimal_simplex_risk(sig_from([2.0], (3,), sigma2=2.0, tail=0.5))
    assert risk == pytest.approx(6.5)
    assert np.allclose(w, [1.0])


def test_monotone_snr_gap_identity():
    # SNRs from position 2 are non-increasing, so M_T = M.
    sig = sig_from([2.0, 6.0, 2.0, 0.5], (2, 4, 6, 8), sigma2=1.0, tail=0.3)
    assert reduce_to_mt(sig).sizes == sig.mset.sizes
    simplex, w = optimal_simplex_risk(sig)
    relaxed, _ = optimal_relaxed_risk(sig)
    e1, v1 = sig.mu_energy[0], sig.block_noise[0]
    assert simplex - relaxed == pytest.approx(v1**2 / (e1 + v1), abs=1e-12)
    assert in_simplex(w)


def test_simplex_matches_monotone_grid(rng):
    G = monotone_grid(4, 0.01)
    for _ in range(10):
        sig = sig_from(rng.uniform(0, 4, 4), (1, 2, 4, 5), sigma2=0.8, tail=0.1)
        risk, w = optimal_simplex_risk(sig)
        grid_min = risk_rows(sig, G).min()
        assert risk <= grid_min + 1e-9
        assert grid_min - risk <= 1e-3
        assert ma_risk(sig, gamma_from_weights(w)) == pytest.approx(risk, abs=1e-9)


def test_reduce_examples():
    sig = sig_from([3.0, 1.0, 4.0], (1, 2, 3))
    assert reduce_to_mt(sig).sizes == (1, 3)
    sig = sig_from([3.0, 4.0, 2.0, 1.0], (1, 2, 3, 4))
    assert reduce_to_mt(sig).sizes == (1, 2, 3, 4)
    with pytest.raises(InvalidParams):
        reduce_to_mt(sig_from([1.0], (1,)))


def test_regroup_sums_blocks():
    sig = sig_from([1.0, 2.0, 3.0, 4.0], (1, 2, 4, 6), tail=0.5)
    sub = regroup(sig, (2, 6))
    assert np.allclose(sub.mu_energy, [3.0, 7.0])
    assert np.allclose(sub.block_noise, [2.0, 4.0])
    assert sub.mu_tail == 0.5
    with pytest.raises(InvalidParams):
        regroup(sig, (1, 4))


@given(signals(max_m=8))
def test_algorithm_output_is_feasible_and_risk_optimal(sig):
    if len(sig.mset) < 2:
        return
    mt = reduce_to_mt(sig)
    red = regroup(sig, mt.sizes)
    assert feasible(red.snr[1:])
    assert {mt.sizes[0], mt.sizes[-1]} == {sig.mset.sizes[0], sig.mset.sizes[-1]}
    # Among feasible subsets, M_T attains the smallest closed-form simplex risk,
    # which is also the simplex optimum on the full set.
    def closed_form(sizes):
        r = regroup(sig, sizes)
        e, v = r.mu_energy[1:], r.block_noise[1:]
        shrink = np.divide(e * v, e + v, out=np.zeros_like(e), where=(e + v) > 0)
        return r.block_noise[0] + shrink.sum() + r.mu_tail

    best = min(
        closed_form(s) for s in subsets_with_endpoints(sig.mset.sizes)
        if feasible(regroup(sig, s).snr[1:])
    )
    assert closed_form(mt.sizes) == pytest.approx(best, rel=1e-12, abs=1e-12)


@given(signals())
def test_sandwich_and_mt_identity(sig):
    relaxed, _ = optimal_relaxed_risk(sig)
    simplex, w = optimal_simplex_risk(sig)
    assert relaxed <= simplex + 1e-9
    assert simplex == pytest.approx(monotone_oracle(sig), rel=1e-9, abs=1e-9)
    r = np.random.default_rng(len(sig.mset))
    for _ in range(5):
        w_rand = r.dirichlet(np.ones(len(sig.mset)))
        assert simplex <= ma_risk(sig, gamma_from_weights(w_rand)) + 1e-9
    if len(sig.mset) >= 2:
        on_mt, _ = optimal_simplex_risk(regroup(sig, reduce_to_mt(sig).sizes))
        assert on_mt == pytest.approx(simplex, rel=1e-9, abs=1e-9)
    assert in_simplex(w)


def test_min_loss_over_simplex_matches_grid(rng):
    G = monotone_grid(4, 0.01)
    for _ in range(10):
        zm = rng.standard_normal(4) * [2, 1, 0.5, 0.2]
        zy = zm + rng.standard_normal(4)
        s, c, e = zy * zy, zy * zm, zm * zm
        loss, g = min_loss_over_simplex(s, c, e, 0.3)
        grid = (e - 2 * G * c + G**2 * s).sum(axis=1) + 0.3
        assert loss <= grid.min() + 1e-9
        assert grid.min() - loss < 1e-3
        assert g[0] == 1.0 and np.all(np.diff(g) <= 0)


# -- diagnostics -----------------------------------------------------------------------

def test_snr_diagnostics_examples():
    m, l, _ = snr_diagnostics(sig_from([0.5, 0.2, 0.1], (1, 2, 3)))
    assert (m, l) == (0, 1)
    m, _, _ = snr_diagnostics(sig_from([5.0, 4.0, 3.0], (1, 2, 3)))
    assert m == 3


def test_snr_diagnostics_increasing_case():
    # Strictly increasing SNRs from block 2 collapse M_T to {k_1, p_n}.
    k1, p = 3, 12
    sizes = (k1, 5, 8, p)
    energy = np.array([6.0, 0.2, 1.5, 8.0])
    sig = sig_from(energy, sizes)
    assert np.all(np.diff(sig.snr[1:]) > 0)
    assert reduce_to_mt(sig).sizes == (k1, p)
    m_star, l_star, ratio = snr_diagnostics(sig)
    strong = sig.snr >= 1
    assert l_star == 2
    assert ratio == pytest.approx(sig.block_noise[strong].sum() / (k1 + (p - k1)))


# -- bounds --------------------------------------------------------------------------

def test_phi_bar_and_theorem41_arithmetic():
    ms = NestedModelSet((8, 16, 24), 24)
    rep = check_assumptions(ms, PenaltySchedule(np.full(3, 0.5), 1 / 3))
    sig = SignalDecomposition.from_energies([5.0, 2.0, 0.1], ms, 1.0)
    relaxed, _ = optimal_relaxed_risk(sig)
    assert bound_theorem41(sig, rep) == pytest.approx(6 * relaxed + 8 * rep.c1_lhs)
    assert bound_theorem41(sig, rep) >= relaxed


def test_phi_zero_raises():
    ms = NestedModelSet((4, 8), 8)
    rep = check_assumptions(ms, PenaltySchedule.zeros(2))
    sig = SignalDecomposition.from_energies([1.0, 1.0], ms, 1.0)
    with pytest.raises(PhiZero):
        bound_theorem41(sig, rep)
    with pytest.raises(PhiZero):
        bound_theorem42(sig, rep, 4)


def test_corollary41():
    ms = NestedModelSet((4, 8, 12), 12)
    zero = SignalDecomposition.from_energies([0.0, 0.0, 0.0], ms, 2.0)
    assert bound_corollary41(zero) == pytest.approx(4 * 3 * 2.0)
    sig = SignalDecomposition.from_energies([3.0, 1.0, 0.5], ms, 1.0)
    assert bound_corollary41(sig, 5) - bound_corollary41(sig, 2) == pytest.approx(12.0)


def test_theorem42_limits_and_monotonicity():
    sig = sig_from(np.linspace(3, 0.1, 10), range(1, 11))
    r_star, _ = optimal_simplex_risk(sig)
    rep = AssumptionReport(c1_lhs=0.7, a2_ok=True, a2add_ok=True, zeta=0.0, phi_bar=0.0)
    assert bound_theorem42(sig, rep, 3) == pytest.approx(r_star + 8 * 0.7 + 3)
    values = [
        bound_theorem42(sig, AssumptionReport(0.7, True, True, z, 1.5), 3) for z in (0.0, 0.5, 2.0)
    ]
    assert values == sorted(values)


def test_bounds_dominate_simulated_risks(rng):
    # Blocks of 64 with tau = 1/3 give phi = 1/4, so 1/d <= (1 - phi)/4 holds,
    # and equal blocks make zeta = 0.
    n, p = 200, 192
    ms = NestedModelSet((64, 128, 192), p)
    phi = penalty_schedule(ms, 1 / 3)
    rep = check_assumptions(ms, phi)
    assert rep.a2_ok and rep.a2add_ok and rep.zeta == 0
    X = rng.standard_normal((n, p))
    basis = orthogonalize(X)
    mu = X @ (np.arange(1, p + 1) ** -1.0)
    sig = signal_decompose(basis, mu, ms, 1.0)
    sig_all = signal_decompose(basis, mu, NestedModelSet(tuple(range(1, p + 1)), p), 1.0)
    pen, plain = [], []
    for _ in range(200):
        y = mu + rng.standard_normal(n)
        d = decompose(basis, y, ms, 1.0)
        pen.append(np.sum((reconstruct(basis, d, ms, solve_relaxed(d, phi)) - mu) ** 2))
        plain.append(np.sum((reconstruct(basis, d, ms, solve_relaxed(d)) - mu) ** 2))

    def lower(x):
        x = np.asarray(x)
        return x.mean() - 3 * x.std(ddof=1) / math.sqrt(x.size)

    assert lower(pen) <= bound_theorem41(sig, rep)
    assert lower(pen) <= bound_theorem42(sig_all, rep, ms.sizes[0])
    assert lower(plain) <= bound_corollary41(sig)
