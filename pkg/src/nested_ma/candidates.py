"""Candidate model sets and the assumption checks for the penalized Stein rule."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, InvalidParams
from .spectral import NestedModelSet
from .weights import PenaltySchedule

NU_MIN = 2


@dataclass(frozen=True)
class ScheduleParams:
    """Parameters of the weakly geometric schedule.

    ``nu`` is the first model size.  ``scale`` is the (possibly unfloored)
    quantity entering ``rho = 1/log(scale)`` and the increments; it defaults
    to ``nu`` and must exceed 1 so that ``rho`` is finite.
    """

    nu: int
    p_n: int
    scale: float | None = None

    def __post_init__(self):
        if self.nu < 1:
            raise InvalidParams(f"nu must be >= 1, got {self.nu}")
        if self.p_n < self.nu:
            raise InvalidParams(f"nu={self.nu} exceeds p_n={self.p_n}")
        if self.scale is None:
            object.__setattr__(self, "scale", float(self.nu))
        if self.scale <= 1:
            raise InvalidParams(f"rho = 1/log({self.scale}) is undefined; need scale > 1")

    @property
    def rho(self) -> float:
        return 1.0 / math.log(self.scale)

    def raw_increment(self, m: int) -> float:
        """Floor argument ``scale * rho * (1 + rho)^(m-1)`` of the ``m``-th increment."""
        return self.scale * self.rho * (1.0 + self.rho) ** (m - 1)


@dataclass(frozen=True)
class AssumptionReport:
    """Diagnostics for a model set paired with a penalty schedule.

    ``c1_lhs`` is the exponential sum bounded by ``c_1``; ``a2_ok`` is the
    block-size/penalty condition ``1/d_m <= (1 - phi_m)/4``; ``a2add_ok`` the
    plain ``d_m > 3`` condition; ``zeta`` the largest increment ratio minus 1;
    ``phi_bar`` the leading-constant term of the oracle inequality (``inf``
    when some ``phi_m`` is zero).
    """

    c1_lhs: float
    a2_ok: bool
    a2add_ok: bool
    zeta: float
    phi_bar: float


def full_nested_set(p_n: int) -> NestedModelSet:
    if p_n < 1:
        raise InvalidParams(f"p_n must be >= 1, got {p_n}")
    return NestedModelSet(tuple(range(1, p_n + 1)), p_n)


def geometric_set(params: ScheduleParams) -> NestedModelSet:
    """Weakly geometric blocks.

    ``k_1 = nu`` and ``k_m = k_{m-1} + floor(scale rho (1+rho)^(m-1))`` for
    ``m >= 2``, for as long as the cumulative size stays ``<= p_n``.  The last
    cumulative size that fits is then replaced by ``p_n``, so the terminal
    block absorbs the remainder.  Increments are at least 1.
    """
    cum = [params.nu]
    m = 2
    while True:
        k = cum[-1] + max(1, math.floor(params.raw_increment(m)))
        if k > params.p_n:
            break
        cum.append(k)
        m += 1
    sizes = cum[:-1] if len(cum) > 1 else cum
    if sizes[-1] != params.p_n:
        sizes.append(params.p_n)
    return NestedModelSet(tuple(sizes), params.p_n)


def equal_block_set(p_n: int, block: int) -> NestedModelSet:
    if block < 1:
        raise InvalidParams(f"block must be >= 1, got {block}")
    sizes = list(range(block, p_n + 1, block))
    if not sizes or sizes[-1] != p_n:
        sizes.append(p_n)
    return NestedModelSet(tuple(sizes), p_n)


def two_model_set(p_n: int) -> NestedModelSet:
    if p_n < 2:
        raise InvalidParams(f"the two-model set needs p_n >= 2, got {p_n}")
    return NestedModelSet((1, p_n), p_n)


def _nu_raw(n: int, mode: str) -> float:
    if n < 3:
        raise InvalidParams(f"n must be >= 3, got {n}")
    if mode == "log":
        return math.log(n)
    if mode == "loglog":
        return math.log(math.log(n))
    raise InvalidParams(f"unknown nu mode {mode!r}")


def nu_choice(n: int, mode: str = "log") -> int:
    """``floor(log n)`` or ``floor(log log n)``, at least 1."""
    return max(math.floor(_nu_raw(n, mode)), 1)


def schedule_params(n: int, p_n: int, mode: str = "log") -> ScheduleParams:
    """Schedule for sample size ``n``.

    ``rho`` uses the floored ``nu`` when that is at least 2; otherwise
    ``log(1) = 0`` would make ``rho`` infinite, and the unfloored value is
    used for ``rho`` and the increments instead.
    """
    nu = nu_choice(n, mode)
    scale = float(nu) if nu >= NU_MIN else _nu_raw(n, mode)
    return ScheduleParams(min(nu, p_n), p_n, scale)


def phi_bar(mset: NestedModelSet, phi: PenaltySchedule) -> float:
    f = phi.phi
    if np.any(f == 0):
        return math.inf
    d = mset.increments
    return float(np.max(2 * f + 16.0 / (d * f)))


def increment_zeta(increments) -> float:
    d = np.asarray(increments, dtype=float)
    if d.size < 2:
        return 0.0
    return max(float(np.max(d[1:] / d[:-1])) - 1.0, 0.0)


def check_assumptions(mset: NestedModelSet, phi: PenaltySchedule) -> AssumptionReport:
    if len(phi) != len(mset):
        raise DimensionMismatch(f"penalty schedule has length {len(phi)}, model set has {len(mset)}")
    d = mset.increments.astype(float)
    f = phi.phi
    c1 = float(np.sum(np.exp(-d * f**2 / (16 * (1 + 2 * np.sqrt(f)) ** 2))))
    return AssumptionReport(
        c1_lhs=c1,
        a2_ok=bool(np.all(1.0 / d <= (1.0 - f) / 4.0 + 1e-12)),
        a2add_ok=bool(np.all(d > 3)),
        zeta=increment_zeta(d),
        phi_bar=phi_bar(mset, phi),
    )
