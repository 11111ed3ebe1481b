"""Weight estimators for nested model averaging.

Weights ``w`` and cumulative weights ``gamma_m = sum_{j >= m} w_j`` are two
parameterizations of the same estimator.  In the ``gamma`` form the Mallows
criterion is separable over blocks, which turns simplex-constrained MMA into
bounded antitonic least squares (solved exactly by PAVA) and the relaxed
problem into a coordinatewise positive-part Stein rule.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, EmptyInput, InvalidParams
from .spectral import BlockDecomposition, NestedModelSet

PHI_MAX = 1.0 - 1e-9
MEMBERSHIP_TOL = 1e-8


@dataclass(frozen=True)
class PenaltySchedule:
    phi: np.ndarray
    tau: float

    def __post_init__(self):
        phi = np.array(self.phi, dtype=float)
        if np.any(phi < 0) or np.any(phi >= 1):
            raise InvalidParams("penalty factors must lie in [0, 1)")
        phi.setflags(write=False)
        object.__setattr__(self, "phi", phi)

    def __len__(self) -> int:
        return self.phi.size

    @classmethod
    def zeros(cls, m: int) -> "PenaltySchedule":
        return cls(np.zeros(m), 0.0)


def gamma_from_weights(w) -> np.ndarray:
    w = np.asarray(w, dtype=float)
    return np.cumsum(w[::-1])[::-1]


def weights_from_gamma(gamma) -> np.ndarray:
    gamma = np.asarray(gamma, dtype=float)
    return gamma - np.append(gamma[1:], 0.0)


def in_simplex(w, tol: float = MEMBERSHIP_TOL) -> bool:
    w = np.asarray(w, dtype=float)
    return bool(np.all(w >= -tol) and np.all(w <= 1 + tol) and abs(w.sum() - 1) <= tol)


def in_relaxed(w, tol: float = MEMBERSHIP_TOL) -> bool:
    """Membership in the relaxed set: every tail sum of ``w`` lies in [0, 1]."""
    return in_hypercube(gamma_from_weights(w), tol)


def in_monotone(gamma, tol: float = MEMBERSHIP_TOL) -> bool:
    g = np.asarray(gamma, dtype=float)
    return bool(
        abs(g[0] - 1) <= tol
        and np.all(np.diff(g) <= tol)
        and g[-1] >= -tol
    )


def in_hypercube(gamma, tol: float = MEMBERSHIP_TOL) -> bool:
    g = np.asarray(gamma, dtype=float)
    return bool(np.all(g >= -tol) and np.all(g <= 1 + tol))


def mma_criterion(decomp: BlockDecomposition, gamma, penalty_coef: float = 2.0) -> float:
    """Mallows criterion ``||y - mu_gamma||^2 + c * sigma^2 * k'w`` in gamma form."""
    g = np.asarray(gamma, dtype=float)
    s = decomp.block_energy
    if g.shape != s.shape:
        raise DimensionMismatch(f"gamma has length {g.size}, decomposition has {s.size} blocks")
    terms = s * (1 - g) ** 2 + penalty_coef * decomp.block_noise * g
    return float(terms.sum() + decomp.residual_energy)


def _pool_mean(total: float, weight: float) -> float:
    if weight > 0:
        return total / weight
    # A zero-weight pool with a linear term is pushed to the matching bound.
    return np.inf if total > 0 else -np.inf


def _pava_decreasing(sums: np.ndarray, w: np.ndarray) -> np.ndarray:
    # Stack of pooled blocks: (sum of linear terms, weight, length).
    totals: list[float] = []
    wts: list[float] = []
    lens: list[int] = []
    for si, wi in zip(sums, w):
        totals.append(si)
        wts.append(wi)
        lens.append(1)
        while len(totals) > 1 and _pool_mean(totals[-1], wts[-1]) >= _pool_mean(totals[-2], wts[-2]):
            t, ww, n = totals.pop(), wts.pop(), lens.pop()
            totals[-1] += t
            wts[-1] += ww
            lens[-1] += n
    return np.repeat([_pool_mean(t, ww) for t, ww in zip(totals, wts)], lens)


def antitonic_quadratic(sums, weights, lower: float = 0.0, upper: float = 1.0, pin_first=None):
    """Minimize ``sum_m (weights_m x_m^2 - 2 sums_m x_m)`` over the bounded antitonic set.

    This is ``pava_antitonic`` with the targets folded into ``sums``, which
    stays well defined when a weight is zero but its linear term is not.  A
    coordinate with zero weight and zero linear term does not enter the
    objective; it copies the nearest preceding fitted value (or the following
    one when none precedes).
    """
    h = np.asarray(sums, dtype=float)
    a = np.asarray(weights, dtype=float)
    if h.size == 0:
        raise EmptyInput("need at least one coordinate")
    if h.shape != a.shape:
        raise DimensionMismatch(f"sums {h.shape} and weights {a.shape} differ")
    if np.any(a < 0):
        raise InvalidParams("weights must be non-negative")
    if lower > upper:
        raise InvalidParams(f"lower={lower} exceeds upper={upper}")

    if pin_first is not None:
        out = np.empty_like(h)
        out[0] = pin_first
        if h.size > 1:
            out[1:] = antitonic_quadratic(h[1:], a[1:], lower, min(upper, pin_first))
        return out

    out = np.empty_like(h)
    active = (a > 0) | (h != 0)
    if not active.any():
        out[:] = upper
        return out
    fit = np.clip(_pava_decreasing(h[active], a[active]), lower, upper)
    out[active] = fit
    idx = np.flatnonzero(active)
    pos = np.searchsorted(idx, np.arange(h.size), side="right") - 1
    out[~active] = fit[np.maximum(pos[~active], 0)]
    return out


def pava_antitonic(targets, weights, lower: float = 0.0, upper: float = 1.0, pin_first=None):
    """Weighted least squares under ``x_1 >= x_2 >= ... >= x_M`` and box bounds.

    Minimizes ``sum_m weights_m (x_m - targets_m)^2`` subject to the order,
    ``lower <= x_m <= upper`` and, when ``pin_first`` is given, ``x_1 = pin_first``.
    Clipping the unconstrained antitonic fit to the box is exact for box
    constrained isotonic regression.  Coordinates with zero weight do not
    affect the objective; they copy the nearest preceding fitted value (or
    the following one when none precedes).
    """
    t = np.asarray(targets, dtype=float)
    a = np.asarray(weights, dtype=float)
    if t.shape != a.shape:
        raise DimensionMismatch(f"targets {t.shape} and weights {a.shape} differ")
    return antitonic_quadratic(np.where(a > 0, t * a, 0.0), a, lower, upper, pin_first)


def solve_mma_simplex(decomp: BlockDecomposition, penalty_coef: float = 2.0) -> np.ndarray:
    """Exact Mallows-MMA cumulative weights over the unit simplex.

    Completing the square block by block gives
    ``s_m (gamma_m - b_m)^2 + const`` with ``b_m = 1 - c sigma2_m / (2 s_m)``,
    so the minimizer over the monotone set is a weighted antitonic fit with
    ``gamma_1`` pinned to 1 and values in [0, 1].  The fit is run on the
    linear terms ``s_m b_m`` so that a block with ``s_m = 0``, whose
    criterion is the increasing line ``c sigma2_m gamma_m``, is handled exactly.
    """
    s = decomp.block_energy
    if s.size == 0:
        raise EmptyInput("decomposition has no blocks")
    h = s - penalty_coef * decomp.block_noise / 2.0
    return antitonic_quadratic(h, s, 0.0, 1.0, pin_first=1.0)


def solve_relaxed(decomp: BlockDecomposition, phi: PenaltySchedule | None = None) -> np.ndarray:
    """Penalized blockwise positive-part Stein rule (``phi = 0`` is plain Stein)."""
    s = decomp.block_energy
    f = np.zeros_like(s) if phi is None else phi.phi
    if f.shape != s.shape:
        raise DimensionMismatch(f"penalty schedule has length {f.size}, expected {s.size}")
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        g = np.where(s > 0, 1.0 - decomp.block_noise * (1.0 + f) / s, 0.0)
    return np.maximum(g, 0.0)


def penalty_schedule(mset: NestedModelSet, tau: float) -> PenaltySchedule:
    """``phi_m = (k_m - k_{m-1})^(-tau)``, clamped below 1 for unit blocks."""
    if not 0.0 < tau < 0.5:
        raise InvalidParams(f"tau must lie in (0, 1/2), got {tau}")
    phi = mset.increments.astype(float) ** (-tau)
    return PenaltySchedule(np.minimum(phi, PHI_MAX), tau)
