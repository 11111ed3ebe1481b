"""Orthogonal block statistics for nested least-squares models.

A design matrix ``X`` is an ``(n, p)`` float array in row-major (C) order,
one row per observation.  Column ``j`` (0-based) is regressor ``j + 1``; the
candidate model of size ``k`` uses the leading ``k`` columns.

Householder QR preserves nested spans: the first ``k`` columns of ``q`` span
the same space as the first ``k`` columns of ``X``, so the projection onto
model ``k`` is ``q[:, :k] @ q[:, :k].T`` and all block statistics reduce to
sums over the coefficient vector ``z = q.T @ y``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DimensionMismatch, InvalidParams, RankDeficient

RANK_TOL = 1e-10


def _frozen(a) -> np.ndarray:
    out = np.array(a, dtype=float)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class NestedModelSet:
    """Strictly increasing candidate model sizes ``k_1 < ... < k_M <= p_n``."""

    sizes: tuple[int, ...]
    p_n: int

    def __post_init__(self):
        sizes = tuple(int(k) for k in self.sizes)
        object.__setattr__(self, "sizes", sizes)
        object.__setattr__(self, "p_n", int(self.p_n))
        if not sizes:
            raise InvalidParams("a model set needs at least one model")
        if sizes[0] < 1:
            raise InvalidParams(f"smallest model size must be >= 1, got {sizes[0]}")
        if sizes[-1] > self.p_n:
            raise InvalidParams(f"largest model size {sizes[-1]} exceeds p_n={self.p_n}")
        if any(b <= a for a, b in zip(sizes, sizes[1:])):
            raise InvalidParams(f"model sizes must be strictly increasing: {sizes}")

    def __len__(self) -> int:
        return len(self.sizes)

    @property
    def increments(self) -> np.ndarray:
        """Block dimensions ``k_m - k_{m-1}`` with ``k_0 = 0``."""
        return np.diff(np.asarray((0,) + self.sizes))

    @property
    def starts(self) -> np.ndarray:
        """0-based first column of every block."""
        return np.asarray((0,) + self.sizes[:-1])

    def subset(self, sizes: Sequence[int]) -> "NestedModelSet":
        missing = set(sizes) - set(self.sizes)
        if missing:
            raise InvalidParams(f"sizes {sorted(missing)} are not in the model set")
        return NestedModelSet(tuple(sorted(sizes)), self.p_n)


@dataclass(frozen=True)
class OrthoBasis:
    q: np.ndarray
    r_diag_min: float

    @property
    def n(self) -> int:
        return self.q.shape[0]

    @property
    def p(self) -> int:
        return self.q.shape[1]


@dataclass(frozen=True)
class BlockDecomposition:
    """Sufficient statistics of ``y`` for every estimator on one model set.

    ``block_energy[m]`` is the squared norm of the projection of ``y`` on the
    ``m``-th orthogonal block, ``block_noise[m]`` the block's noise level
    ``(k_m - k_{m-1}) * sigma2``.
    """

    block_energy: np.ndarray
    block_noise: np.ndarray
    residual_energy: float
    coeffs: np.ndarray
    sigma2: float
    mset: NestedModelSet = field(repr=False)

    @property
    def total_energy(self) -> float:
        return float(self.block_energy.sum() + self.residual_energy)


def as_design(X) -> np.ndarray:
    X = np.ascontiguousarray(X, dtype=float)
    if X.ndim != 2:
        raise DimensionMismatch(f"design matrix must be 2-D, got shape {X.shape}")
    n, p = X.shape
    if p > n:
        raise DimensionMismatch(f"need p <= n, got n={n}, p={p}")
    return X


def orthogonalize(X) -> OrthoBasis:
    """Householder QR of ``X`` with a relative rank check on ``diag(R)``."""
    X = as_design(X)
    q, r = np.linalg.qr(X, mode="reduced")
    d = np.abs(np.diag(r))
    if d.size == 0:
        raise DimensionMismatch("design matrix has no columns")
    scale = d.max()
    if scale == 0.0 or d.min() < RANK_TOL * scale:
        bad = int(np.argmin(d))
        raise RankDeficient(
            f"column {bad + 1} is numerically dependent on earlier columns "
            f"(|r_jj|={d[bad]:.3g}, max={scale:.3g})"
        )
    return OrthoBasis(_frozen(q), float(d.min()))


def block_sums(values: np.ndarray, mset: NestedModelSet) -> np.ndarray:
    """Sum a per-column array over the blocks of ``mset``."""
    values = np.asarray(values, dtype=float)
    if values.shape[0] < mset.sizes[-1]:
        raise DimensionMismatch(
            f"need at least {mset.sizes[-1]} coefficients, got {values.shape[0]}"
        )
    return np.add.reduceat(values[: mset.sizes[-1]], mset.starts)


def decompose_coeffs(
    z: np.ndarray, y_norm2: float, mset: NestedModelSet, sigma2: float
) -> BlockDecomposition:
    """Block decomposition from precomputed coefficients ``z = q.T y``."""
    if sigma2 <= 0:
        raise InvalidParams(f"sigma2 must be positive, got {sigma2}")
    z = np.asarray(z, dtype=float)
    if mset.p_n != z.shape[0]:
        raise DimensionMismatch(f"model set has p_n={mset.p_n}, basis has {z.shape[0]} columns")
    energy = block_sums(z * z, mset)
    resid = max(float(y_norm2) - float(energy.sum()), 0.0)
    return BlockDecomposition(
        block_energy=_frozen(energy),
        block_noise=_frozen(mset.increments * float(sigma2)),
        residual_energy=resid,
        coeffs=_frozen(z),
        sigma2=float(sigma2),
        mset=mset,
    )


def decompose(
    basis: OrthoBasis, y, mset: NestedModelSet, sigma2: float
) -> BlockDecomposition:
    y = np.asarray(y, dtype=float)
    if y.shape != (basis.n,):
        raise DimensionMismatch(f"y has shape {y.shape}, expected ({basis.n},)")
    if mset.p_n != basis.p:
        raise DimensionMismatch(f"model set has p_n={mset.p_n}, basis has {basis.p} columns")
    z = basis.q.T @ y
    return decompose_coeffs(z, float(y @ y), mset, sigma2)


def expand_gamma(gamma, mset: NestedModelSet) -> np.ndarray:
    """Per-column multipliers for the first ``k_M`` coefficients."""
    gamma = np.asarray(gamma, dtype=float)
    if gamma.shape != (len(mset),):
        raise DimensionMismatch(f"gamma has length {gamma.size}, model set has {len(mset)}")
    return np.repeat(gamma, mset.increments)


def reconstruct(
    basis: OrthoBasis, decomp: BlockDecomposition, mset: NestedModelSet, gamma
) -> np.ndarray:
    """Fitted mean ``sum_m gamma_m y_{m|M}``."""
    if mset != decomp.mset:
        raise DimensionMismatch("decomposition was computed on a different model set")
    g = expand_gamma(gamma, mset)
    k = mset.sizes[-1]
    return basis.q[:, :k] @ (g * decomp.coeffs[:k])
