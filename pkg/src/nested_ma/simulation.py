"""Monte Carlo harness for the nested model-averaging experiments.

Data follow ``y = X beta + eps`` with an all-ones first column, i.i.d.
standard normal remaining regressors and Gaussian noise whose variance is
set from a target population SNR.  Every replicate redraws ``X`` and
``eps`` from its own counter-based stream, factorizes once, and evaluates
every estimator plus two oracle losses (simplex-optimal weights on all
nested models, and on the weakly geometric set).
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .candidates import (
    equal_block_set,
    full_nested_set,
    geometric_set,
    schedule_params,
    two_model_set,
)
from .errors import InvalidParams, RankDeficient, ZeroSignal
from .oracle import min_loss_over_simplex
from .rng import rng_stream
from .spectral import NestedModelSet, block_sums, decompose_coeffs, orthogonalize, reconstruct
from .weights import PenaltySchedule, penalty_schedule, solve_mma_simplex, solve_relaxed

CASES = (1, 2, 3, 4)
MAX_RETRIES = 3
DEFAULT_N_GRID = (50, 100, 250, 500, 1000, 1500)


@dataclass(frozen=True)
class CaseSpec:
    case_id: int
    alpha: float
    snr: float = 1.0

    def __post_init__(self):
        if self.case_id not in CASES:
            raise InvalidParams(f"case must be one of {CASES}, got {self.case_id}")
        if self.alpha <= 0:
            raise InvalidParams(f"alpha must be positive, got {self.alpha}")
        if self.snr <= 0:
            raise InvalidParams(f"snr must be positive, got {self.snr}")


@dataclass(frozen=True)
class EstimatorSpec:
    """One weighting procedure: a candidate-set builder plus a weight solver.

    ``model_set`` is ``full``, ``geometric``, ``equal`` or ``two``; ``solver``
    is ``mma`` (simplex MMA) or ``stein`` (penalized blockwise Stein).  For
    ``mma`` the penalty multiplier is ``penalty`` or ``log n`` when
    ``penalty == "logn"``.  For ``stein`` a ``tau`` of ``None`` means no
    penalty factors.
    """

    name: str
    model_set: str
    solver: str
    penalty: float | str = 2.0
    tau: float | None = None
    nu_mode: str = "log"
    block: int = 4

    def __post_init__(self):
        if self.model_set not in ("full", "geometric", "equal", "two"):
            raise InvalidParams(f"unknown model set {self.model_set!r}")
        if self.solver not in ("mma", "stein"):
            raise InvalidParams(f"unknown solver {self.solver!r}")
        if self.nu_mode not in ("log", "loglog"):
            raise InvalidParams(f"unknown nu mode {self.nu_mode!r}")
        if self.tau is not None and not 0 < self.tau < 0.5:
            raise InvalidParams(f"tau must lie in (0, 1/2), got {self.tau}")
        if self.block < 1:
            raise InvalidParams(f"block must be >= 1, got {self.block}")
        if not (self.penalty == "logn" or (isinstance(self.penalty, (int, float)) and self.penalty > 0)):
            raise InvalidParams(f"penalty must be positive or 'logn', got {self.penalty!r}")

    def build_set(self, n: int, p_n: int) -> NestedModelSet:
        if self.model_set == "full":
            return full_nested_set(p_n)
        if self.model_set == "equal":
            return equal_block_set(p_n, self.block)
        if self.model_set == "two":
            return two_model_set(p_n)
        return geometric_for(n, p_n, self.nu_mode)

    def penalty_coef(self, n: int) -> float:
        return math.log(n) if self.penalty == "logn" else float(self.penalty)

    def phi(self, mset: NestedModelSet) -> PenaltySchedule:
        if self.tau is None:
            return PenaltySchedule.zeros(len(mset))
        return penalty_schedule(mset, self.tau)


def geometric_for(n: int, p_n: int, nu_mode: str) -> NestedModelSet:
    return geometric_set(schedule_params(n, p_n, nu_mode))


PRESETS: dict[str, EstimatorSpec] = {
    "MMA1": EstimatorSpec("MMA1", "full", "mma"),
    "MMA2": EstimatorSpec("MMA2", "full", "mma", penalty="logn"),
    "MMA3": EstimatorSpec("MMA3", "geometric", "mma", nu_mode="log"),
    "MMA4": EstimatorSpec("MMA4", "equal", "mma", block=4),
    "SMA1": EstimatorSpec("SMA1", "geometric", "stein", tau=1 / 3, nu_mode="log"),
    "SMA2": EstimatorSpec("SMA2", "geometric", "stein", tau=1 / 3, nu_mode="loglog"),
    "SMA3": EstimatorSpec("SMA3", "two", "stein"),
}


@dataclass(frozen=True)
class SimulationConfig:
    case: CaseSpec
    estimators: tuple[EstimatorSpec, ...]
    n_values: tuple[int, ...] = DEFAULT_N_GRID
    replicates: int = 100
    seed: int = 20240101
    mode: str = "table"
    oracle_nu_mode: str = "log"
    figure_oracle: str = "shared"
    workers: int = 1

    def __post_init__(self):
        if self.replicates < 2:
            raise InvalidParams(f"need at least 2 replicates, got {self.replicates}")
        if not self.n_values or any(n < 3 for n in self.n_values):
            raise InvalidParams(f"n values must be >= 3, got {self.n_values}")
        if self.mode not in ("table", "figure"):
            raise InvalidParams(f"mode must be 'table' or 'figure', got {self.mode!r}")
        if not self.estimators:
            raise InvalidParams("no estimators configured")
        if self.oracle_nu_mode not in ("log", "loglog"):
            raise InvalidParams(f"unknown oracle nu mode {self.oracle_nu_mode!r}")
        if self.figure_oracle not in ("shared", "mean"):
            raise InvalidParams(f"figure_oracle must be 'shared' or 'mean', got {self.figure_oracle!r}")
        names = [e.name for e in self.estimators]
        if len(set(names)) != len(names):
            raise InvalidParams(f"duplicate estimator names in {names}")
        if self.workers < 1:
            raise InvalidParams(f"workers must be >= 1, got {self.workers}")


def p_rule(n: int) -> int:
    """``floor(4 n^(2/3))``, capped at ``n`` so the design keeps full column rank."""
    return min(math.floor(4 * n ** (2 / 3) + 1e-9), n)


def generate_design(n: int, p_n: int, stream: np.random.Generator) -> np.ndarray:
    if not 1 <= p_n <= n:
        raise InvalidParams(f"need 1 <= p_n <= n, got n={n}, p_n={p_n}")
    X = np.empty((n, p_n))
    X[:, 0] = 1.0
    X[:, 1:] = stream.standard_normal((n, p_n - 1))
    return X


def beta_for_case(case: CaseSpec, p_n: int) -> np.ndarray:
    j = np.arange(1, p_n + 1, dtype=float)
    a = case.alpha
    if case.case_id == 1:
        return j**-a
    if case.case_id == 2:
        return np.exp(-(j**a))
    rev = p_n + 1 - j
    if case.case_id == 3:
        return rev**-a
    return np.exp(-(rev**a))


def calibrate_sigma2(beta, snr: float) -> float:
    """Noise variance giving population SNR ``||beta_{-1}||^2 / sigma^2 = snr`` (identity covariance)."""
    b = np.asarray(beta, dtype=float)[1:]
    energy = float(b @ b)
    if energy == 0.0:
        raise ZeroSignal("coefficients beyond the intercept are all zero")
    return energy / snr


@dataclass
class ReplicateResult:
    losses: dict[str, float]
    oracle_full: float
    oracle_geometric: float
    # Per-column statistics on all nested models, kept for the shared-weight oracle.
    y_energy: np.ndarray = field(repr=False)
    cross: np.ndarray = field(repr=False)
    mu_energy: np.ndarray = field(repr=False)
    mu_tail: float = 0.0


@lru_cache(maxsize=256)
def _setup(case: CaseSpec, n: int):
    p = p_rule(n)
    beta = beta_for_case(case, p)
    beta.setflags(write=False)
    return p, beta, calibrate_sigma2(beta, case.snr)


def _draw(config: SimulationConfig, n: int, r: int):
    p, beta, sigma2 = _setup(config.case, n)
    for attempt in range(MAX_RETRIES + 1):
        suffix = "" if attempt == 0 else f"/retry{attempt}"
        X = generate_design(n, p, rng_stream(config.seed, n, r, "design" + suffix))
        try:
            basis = orthogonalize(X)
        except RankDeficient:
            if attempt == MAX_RETRIES:
                raise
            continue
        eps = rng_stream(config.seed, n, r, "noise" + suffix).standard_normal(n)
        mu = X @ beta
        return basis, mu, mu + math.sqrt(sigma2) * eps, sigma2
    raise AssertionError("unreachable")


def run_replicate(config: SimulationConfig, n: int, replicate: int) -> ReplicateResult:
    basis, mu, y, sigma2 = _draw(config, n, replicate)
    p = basis.p
    zy = basis.q.T @ y
    zm = basis.q.T @ mu
    y2 = float(y @ y)
    decomps = {}
    losses = {}
    for est in config.estimators:
        mset = est.build_set(n, p)
        if mset not in decomps:
            decomps[mset] = decompose_coeffs(zy, y2, mset, sigma2)
        d = decomps[mset]
        if est.solver == "mma":
            gamma = solve_mma_simplex(d, est.penalty_coef(n))
        else:
            gamma = solve_relaxed(d, est.phi(mset))
        fit = reconstruct(basis, d, mset, gamma)
        losses[est.name] = float(np.sum((fit - mu) ** 2))

    s, c, e = zy * zy, zy * zm, zm * zm
    tail = max(float(mu @ mu) - float(e.sum()), 0.0)
    full, _ = min_loss_over_simplex(s, c, e, tail)
    geo = geometric_for(n, p, config.oracle_nu_mode)
    geo_loss, _ = min_loss_over_simplex(
        block_sums(s, geo), block_sums(c, geo), block_sums(e, geo), tail
    )
    return ReplicateResult(losses, full, geo_loss, s, c, e, tail)


@dataclass
class RiskRow:
    estimator: str
    n: int
    p_n: int
    mean_loss: float
    norm_risk: float
    se: float
    replicates: int
    ratios: np.ndarray = field(repr=False)


@dataclass
class RiskReport:
    config: SimulationConfig
    rows: list[RiskRow]

    def get(self, estimator: str, n: int) -> RiskRow:
        for row in self.rows:
            if row.estimator == estimator and row.n == n:
                return row
        raise KeyError((estimator, n))


def run_all(config: SimulationConfig, n: int) -> list[ReplicateResult]:
    """Replicates ``0..R-1`` in index order, regardless of how many workers run them."""
    idx = range(config.replicates)
    if config.workers == 1:
        return [run_replicate(config, n, r) for r in idx]
    with ThreadPoolExecutor(max_workers=config.workers) as pool:
        return list(pool.map(lambda r: run_replicate(config, n, r), idx))


def shared_weight_oracle(results: list[ReplicateResult]) -> float:
    """Minimum over one simplex weight vector of the replicate-averaged loss on all nested models."""
    R = len(results)
    s = sum(res.y_energy for res in results) / R
    c = sum(res.cross for res in results) / R
    e = sum(res.mu_energy for res in results) / R
    tail = sum(res.mu_tail for res in results) / R
    value, _ = min_loss_over_simplex(s, c, e, tail)
    return value


def summarize(config: SimulationConfig, n: int, results: list[ReplicateResult]) -> list[RiskRow]:
    """Normalized risks at one ``n``.

    Table mode averages per-replicate ratios to the geometric-set oracle loss.
    Figure mode divides the mean loss by an all-models oracle: either one
    shared weight vector fitted to replicate-averaged statistics, or the mean
    of per-replicate minima (``figure_oracle = "mean"``).
    """
    R = len(results)
    rows = []
    denom = None
    if config.mode == "figure":
        if config.figure_oracle == "shared":
            denom = shared_weight_oracle(results)
        else:
            denom = float(np.mean([res.oracle_full for res in results]))
    oracle = np.array([res.oracle_geometric for res in results])
    for est in config.estimators:
        loss = np.array([res.losses[est.name] for res in results])
        if config.mode == "figure":
            ratios = loss / denom
            norm = float(loss.mean() / denom)
        else:
            ratios = loss / oracle
            norm = float(ratios.mean())
        se = float(ratios.std(ddof=1) / math.sqrt(R))
        rows.append(RiskRow(est.name, n, p_rule(n), float(loss.mean()), norm, se, R, ratios))
    return rows


def monte_carlo(config: SimulationConfig) -> RiskReport:
    rows: list[RiskRow] = []
    for n in config.n_values:
        rows.extend(summarize(config, n, run_all(config, n)))
    return RiskReport(config, rows)
