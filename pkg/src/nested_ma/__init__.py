"""Nested model averaging: Mallows and Stein-type weights, oracle risks, simulations."""
from .candidates import (
    AssumptionReport,
    ScheduleParams,
    check_assumptions,
    equal_block_set,
    full_nested_set,
    geometric_set,
    nu_choice,
    schedule_params,
    two_model_set,
)
from .errors import (
    ConfigError,
    DimensionMismatch,
    EmptyInput,
    InvalidParams,
    NestedMAError,
    PhiZero,
    RankDeficient,
    ZeroSignal,
)
from .oracle import (
    SignalDecomposition,
    bound_corollary41,
    bound_theorem41,
    bound_theorem42,
    ma_risk,
    min_loss_over_simplex,
    optimal_relaxed_risk,
    optimal_simplex_risk,
    reduce_to_mt,
    signal_decompose,
    snr_diagnostics,
)
from .simulation import PRESETS, CaseSpec, EstimatorSpec, SimulationConfig, monte_carlo
from .spectral import BlockDecomposition, NestedModelSet, OrthoBasis, decompose, orthogonalize, reconstruct
from .weights import (
    PenaltySchedule,
    gamma_from_weights,
    mma_criterion,
    pava_antitonic,
    penalty_schedule,
    solve_mma_simplex,
    solve_relaxed,
    weights_from_gamma,
)

__version__ = "0.1.0"
