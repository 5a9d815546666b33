"""Repeated Colonel Blotto games with payoff estimation from own feedback."""

from __future__ import annotations

__version__ = "0.1.0"

from .bounds import (
    AllocationBounds,
    BattlefieldOutcome,
    BoundFlags,
    bandit_feasible_filter,
    classify_outcomes,
    combined_bounds,
    general_lower_bounds,
    table_bounds,
    tight_lower_bounds,
    tight_upper_bounds,
)
from .core import (
    BANDIT,
    FEEDBACK_MODES,
    PLAYERS,
    SEMI_BANDIT,
    Decision,
    Feedback,
    GameConfig,
    PayoffVector,
    RoundRecord,
    payoff_vector,
    play_round,
    regret,
)
from .errors import (
    BlottoLabError,
    ConfigError,
    DimensionMismatch,
    DomainError,
    EmptySupport,
    InfeasibleFeedback,
    StrategyFault,
    UnsupportedFeedback,
)
from .estimators import (
    DecisionDistribution,
    FeasibleSet,
    expected_payoff,
    feasible_set,
    max_payoff,
    max_payoff_bruteforce,
    observable_expected_payoff,
    observable_max_payoff,
    supremum_payoff,
)
from .evaluation import (
    DEFAULT_CONFIGS,
    DEFAULT_STRATEGIES,
    K3_CONFIGS,
    METRIC_KINDS,
    ErrorSummary,
    GameResult,
    MetricSeries,
    SuiteResult,
    derive_game_seed,
    nrmse,
    rrsd,
    run_game,
    run_suite,
    write_suite_outputs,
)
from .graph import (
    DecisionGraph,
    build_graph,
    count_decisions,
    decision_array,
    enumerate_decisions,
    prune_by_bounds,
    prune_dead_ends,
    prune_unreachable,
    sample_uniform_decision,
)
from .strategies import (
    STRATEGY_KINDS,
    StrategySpec,
    discretize,
    make_strategy,
    parse_strategy_spec,
)

__all__ = [name for name in dir() if not name.startswith("_")]
