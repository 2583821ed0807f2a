"""Solver and verification toolkit for trial and tiered pricing mechanisms
under conclusive Poisson learning."""

__version__ = "0.1.0"

from .errors import (
    BracketingError,
    BudgetExceeded,
    ConfigError,
    DegenerateDensity,
    DegenerateSet,
    IrregularDistribution,
    PreconditionFailed,
    TrialkitError,
    UnsupportedSupport,
    UseFiniteHorizon,
    WeightOutOfRange,
)
from .config import RunConfig, load_config, parse_config
from .primitives import (
    ModelParams,
    ValueDistribution,
    check_horizon,
    monopoly_price,
    virtual_value,
)
from .simulate import (
    BuyerStrategy,
    ScanRow,
    SimConfig,
    SimReport,
    best_response_scan,
    sample_arrival,
    simulate_game,
    standard_deviations,
    stream_uniforms,
)
from .mechanism import (
    DirectMechanism,
    ICReport,
    StepFunction,
    check_ic,
    from_trial,
    interim_utility,
    posterior_no_news,
)
from .extensions import (
    BadNewsReport,
    CancellableTrial,
    ExtendedParams,
    InfiniteHorizonTrial,
    MixedNewsReport,
    RefundSchedule,
    bad_news_mechanism,
    cancellable_trial,
    infinite_horizon_trial,
    mixed_news_mechanism,
)
from .frontier import (
    D1Segment,
    PayoffPoint,
    d1_payoffs,
    default_weight_grid,
    frontier_rows,
    intuitive_criterion_equivalent,
    is_equilibrium_payoff,
    trace_frontier,
)
from .oracle import (
    OracleReport,
    control_objective,
    discrete_relaxed_oracle,
    search_optimal_control,
)
from .tiered import (
    ScreeningSet,
    TieredMechanism,
    TieredReport,
    freemium_mechanism,
    horizon_condition,
    image_set,
    lower_envelope_extremes,
    solve_tiered,
    to_direct,
    uses_intermediate,
    welfare_compare,
)
from .trial import (
    FreeTrial,
    PriceInterval,
    SolveReport,
    TrialMechanism,
    expected_virtual_surplus,
    first_best_attainable,
    free_trial,
    make_trial,
    solve_p0,
    solve_t0,
    solve_trial,
    solve_v0,
    weight_cap,
)

__all__ = [name for name in dir() if not name.startswith("_")]
