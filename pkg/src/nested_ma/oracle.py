"""Exact risks, oracle weights and risk bounds for nested model averaging.

Everything here works on the block energies of the true mean ``mu``; no
noise is drawn.  ``ma_risk`` is the risk of a fixed cumulative-weight
estimator, the ``optimal_*`` functions minimize it over the relaxed
hypercube and over the simplex (via the reduced set M_T), and the
``bound_*`` functions evaluate the right-hand sides of the oracle
inequalities for the penalized and plain Stein rules.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .candidates import AssumptionReport
from .errors import DimensionMismatch, InvalidParams, PhiZero
from .spectral import NestedModelSet, OrthoBasis, block_sums
from .weights import antitonic_quadratic, weights_from_gamma


@dataclass(frozen=True)
class SignalDecomposition:
    mu_energy: np.ndarray
    mu_tail: float
    block_noise: np.ndarray
    mset: NestedModelSet = field(repr=False)
    sigma2: float = 1.0

    def __post_init__(self):
        e = np.array(self.mu_energy, dtype=float)
        v = np.array(self.block_noise, dtype=float)
        if e.shape != (len(self.mset),) or v.shape != e.shape:
            raise DimensionMismatch("energy/noise lengths must match the model set")
        if np.any(e < 0) or np.any(v < 0) or self.mu_tail < 0:
            raise InvalidParams("energies and noise levels must be non-negative")
        e.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "mu_energy", e)
        object.__setattr__(self, "block_noise", v)

    @classmethod
    def from_energies(cls, mu_energy, mset: NestedModelSet, sigma2: float, mu_tail: float = 0.0):
        return cls(np.asarray(mu_energy, float), float(mu_tail), mset.increments * sigma2, mset, sigma2)

    @property
    def snr(self) -> np.ndarray:
        return block_snr(self.mu_energy, self.block_noise)


def block_snr(energy, noise) -> np.ndarray:
    energy = np.asarray(energy, dtype=float)
    noise = np.asarray(noise, dtype=float)
    out = np.zeros_like(energy)
    np.divide(energy, noise, out=out, where=energy > 0)
    return out


def signal_decompose(
    basis: OrthoBasis, mu, mset: NestedModelSet, sigma2: float
) -> SignalDecomposition:
    mu = np.asarray(mu, dtype=float)
    if mu.shape != (basis.n,):
        raise DimensionMismatch(f"mu has shape {mu.shape}, expected ({basis.n},)")
    if mset.p_n != basis.p:
        raise DimensionMismatch(f"model set has p_n={mset.p_n}, basis has {basis.p} columns")
    c = basis.q.T @ mu
    e = block_sums(c * c, mset)
    tail = max(float(mu @ mu) - float(e.sum()), 0.0)
    return SignalDecomposition(e, tail, mset.increments * float(sigma2), mset, float(sigma2))


def regroup(sig: SignalDecomposition, sizes) -> SignalDecomposition:
    """Block energies of ``mu`` on a sub-model-set, by summing finer blocks."""
    sub = sig.mset.subset(sizes)
    if sub.sizes[-1] != sig.mset.sizes[-1]:
        raise InvalidParams("a regrouped set must keep the largest model")
    pos = np.searchsorted(sig.mset.sizes, sub.sizes)
    cum = np.concatenate([[0.0], np.cumsum(sig.mu_energy)])
    return SignalDecomposition(
        np.diff(cum[np.concatenate([[0], pos + 1])]),
        sig.mu_tail,
        sub.increments * sig.sigma2,
        sub,
        sig.sigma2,
    )


def ma_risk(sig: SignalDecomposition, gamma) -> float:
    g = np.asarray(gamma, dtype=float)
    if g.shape != sig.mu_energy.shape:
        raise DimensionMismatch(f"gamma has length {g.size}, expected {sig.mu_energy.size}")
    terms = sig.mu_energy * (1 - g) ** 2 + sig.block_noise * g**2
    return float(terms.sum() + sig.mu_tail)


def _shrink_terms(e: np.ndarray, v: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    tot = e + v
    gamma = np.zeros_like(e)
    risk = np.zeros_like(e)
    np.divide(e, tot, out=gamma, where=tot > 0)
    np.divide(e * v, tot, out=risk, where=tot > 0)
    return risk, gamma


def optimal_relaxed_risk(sig: SignalDecomposition) -> tuple[float, np.ndarray]:
    """Minimum of ``ma_risk`` over ``[0, 1]^M`` and its coordinatewise minimizer."""
    risk, gamma = _shrink_terms(sig.mu_energy, sig.block_noise)
    return float(risk.sum() + sig.mu_tail), gamma


def reduce_to_mt(sig: SignalDecomposition) -> NestedModelSet:
    """Iteratively drop every model whose block SNR is below the next block's.

    Positions 2..L-1 are eligible; all violators of a round are removed at
    once and SNRs are recomputed on the reduced set before the next round.
    The smallest and largest models are always kept.
    """
    if len(sig.mset) < 2:
        raise InvalidParams("reduce_to_mt needs at least two models")
    cur = sig
    while len(cur.mset) > 2:
        snr = cur.snr
        drop = [i for i in range(1, len(snr) - 1) if snr[i] < snr[i + 1]]
        if not drop:
            break
        keep = [k for i, k in enumerate(cur.mset.sizes) if i not in drop]
        cur = regroup(sig, keep)
    return cur.mset


def optimal_simplex_risk(sig: SignalDecomposition) -> tuple[float, np.ndarray]:
    """Minimum of ``ma_risk`` over simplex weights, with the attaining weights."""
    if len(sig.mset) == 1:
        return float(sig.block_noise[0] + sig.mu_tail), np.ones(1)
    mt = reduce_to_mt(sig)
    red = regroup(sig, mt.sizes)
    risk, gamma = _shrink_terms(red.mu_energy, red.block_noise)
    value = red.block_noise[0] + risk[1:].sum() + red.mu_tail
    gamma[0] = 1.0
    # Every original block inherits gamma of the reduced block containing it.
    owner = np.searchsorted(mt.sizes, sig.mset.sizes)
    return float(value), weights_from_gamma(gamma[owner])


def min_loss_over_simplex(
    y_energy, cross, mu_energy, mu_tail: float
) -> tuple[float, np.ndarray]:
    """Minimize the realized loss ``sum ||mu_m - gamma_m y_m||^2 + tail`` over the monotone set.

    ``cross[m]`` is the inner product of the mean and response blocks.  The
    loss is ``sum(e - 2 gamma c + gamma^2 s) + tail``, a weighted antitonic
    fit of ``c/s`` with weights ``s``, run on the linear terms ``c``.
    """
    s = np.asarray(y_energy, dtype=float)
    c = np.asarray(cross, dtype=float)
    e = np.asarray(mu_energy, dtype=float)
    gamma = antitonic_quadratic(c, s, 0.0, 1.0, pin_first=1.0)
    loss = float(np.sum(e - 2 * gamma * c + gamma**2 * s) + mu_tail)
    return max(loss, 0.0), gamma


def snr_diagnostics(sig: SignalDecomposition) -> tuple[int, int, float]:
    """``(m_star, l_star, ratio_bound)`` comparing relaxed and simplex optimal rates."""
    snr = sig.snr
    strong = snr >= 1
    m_star = int(strong.sum())
    num = float(sig.block_noise[strong].sum())
    if len(sig.mset) < 2:
        l_star = 1
        red_noise = sig.block_noise
    else:
        red = regroup(sig, reduce_to_mt(sig).sizes)
        l_star = 1 + int(np.sum(red.snr[1:] >= 1))
        red_noise = red.block_noise
    return m_star, l_star, num / float(red_noise[:l_star].sum())


def _require_finite_phi(report: AssumptionReport) -> None:
    if not math.isfinite(report.phi_bar):
        raise PhiZero("phi_bar is undefined when a penalty factor is zero; use bound_corollary41")


def bound_theorem41(sig: SignalDecomposition, report: AssumptionReport) -> float:
    """``(1 + phi_bar) R_relaxed + 8 c1 sigma^2``."""
    _require_finite_phi(report)
    r_relaxed, _ = optimal_relaxed_risk(sig)
    return (1 + report.phi_bar) * r_relaxed + 8 * report.c1_lhs * sig.sigma2


def bound_corollary41(sig: SignalDecomposition, M: int | None = None) -> float:
    """``R_relaxed + 4 M sigma^2`` for the unpenalized Stein rule."""
    M = len(sig.mset) if M is None else M
    r_relaxed, _ = optimal_relaxed_risk(sig)
    return r_relaxed + 4 * M * sig.sigma2


def bound_theorem42(sig_on_ma: SignalDecomposition, report: AssumptionReport, k1: int) -> float:
    """``(1 + phi_bar)(1 + zeta) R*(M_a) + [8 c1 + k1 (1 + phi_bar)] sigma^2``."""
    _require_finite_phi(report)
    r_star, _ = optimal_simplex_risk(sig_on_ma)
    pb = report.phi_bar
    return (1 + pb) * (1 + report.zeta) * r_star + (8 * report.c1_lhs + k1 * (1 + pb)) * sig_on_ma.sigma2
