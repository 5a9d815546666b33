"""Simulation harness: repeated games, error metrics, and result tables.

A game result carries, for each player, three per-round series pairing a
truth computed from the opponent's actual decision with an estimate
computed only from that player's own feedback:

* ``observable-max-vs-max``: mean best-response payoff over the
  feasible set vs the best-response payoff against the true opponent
  decision.
* ``supremum-vs-max``: the guaranteed-attainable (worst-case over the
  feasible set) payoff vs the same truth.
* ``observable-expected-vs-expected``: feasible-set average of the
  uniform-decision expected payoff vs that expectation against the true
  opponent decision.

Suites run all ordered strategy pairs over a grid of configurations and
reduce each series to NRMSE and RRSD summaries arranged in per-config,
per-focal-player tables.
"""

from __future__ import annotations

import hashlib
import math
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from .bounds import BoundFlags, classify_outcomes, combined_bounds
from .core import SEMI_BANDIT, GameConfig, RoundRecord, play_round
from .errors import DimensionMismatch, DomainError, InfeasibleFeedback
from .estimators import (
    FeasibleSet,
    expected_payoff,
    feasible_set,
    max_payoff,
    observable_expected_payoff,
    observable_max_payoff,
    supremum_payoff,
)
from .strategies import StrategySpec, make_strategy

__all__ = [
    "METRIC_KINDS",
    "MetricSeries",
    "ErrorSummary",
    "GameResult",
    "SuiteResult",
    "nrmse",
    "rrsd",
    "format_value",
    "format_cell",
    "run_game",
    "run_suite",
    "derive_game_seed",
    "write_suite_outputs",
    "write_series_csv",
    "render_table",
    "DEFAULT_CONFIGS",
    "K3_CONFIGS",
    "DEFAULT_STRATEGIES",
    "SUBSTITUTION_NOTES",
]

METRIC_OBSERVABLE_MAX = "observable-max-vs-max"
METRIC_SUPREMUM = "supremum-vs-max"
METRIC_OBSERVABLE_EXPECTED = "observable-expected-vs-expected"
METRIC_KINDS = (METRIC_OBSERVABLE_MAX, METRIC_SUPREMUM, METRIC_OBSERVABLE_EXPECTED)

DEFAULT_CONFIGS: tuple[GameConfig, ...] = (
    GameConfig(k=3, n_a=10, n_b=10),
    GameConfig(k=3, n_a=15, n_b=10),
    GameConfig(k=3, n_a=15, n_b=15),
    GameConfig(k=5, n_a=15, n_b=15),
    GameConfig(k=5, n_a=20, n_b=15),
    GameConfig(k=5, n_a=20, n_b=20),
)
K3_CONFIGS: tuple[GameConfig, ...] = tuple(c for c in DEFAULT_CONFIGS if c.k == 3)

DEFAULT_STRATEGIES: tuple[StrategySpec, ...] = (
    StrategySpec.of("uniform-random"),
    StrategySpec.of("exp3-edge", gamma=0.25, eta=0.05),
    StrategySpec.of("ucb-combinatorial", samples=1000, confidence=1.5),
    StrategySpec.of("static-concentrated", profile="geometric"),
)

# The learners and the static player are house implementations, not
# reproductions of any published Blotto algorithm; result tables must be
# read accordingly. Keyed by strategy kind, carried into run manifests.
SUBSTITUTION_NOTES: dict[str, str] = {
    "uniform-random": "exact uniform sampling over the full decision space",
    "exp3-edge": (
        "generic exponential-weights learner over decision-graph edges; "
        "stands in for published path-learning algorithms, tuning is local"
    ),
    "ucb-combinatorial": (
        "per-battlefield UCB with a sampled-candidate argmax oracle; "
        "stands in for published combinatorial bandit algorithms"
    ),
    "static-concentrated": (
        "fixed allocation replayed every round; stands in for external "
        "continuous allocators fed through the discretizer"
    ),
}


@dataclass(slots=True)
class MetricSeries:
    """Aligned per-round truth and estimate arrays for one metric."""

    metric_kind: str
    true_values: np.ndarray
    estimates: np.ndarray

    def __post_init__(self) -> None:
        self.true_values = np.asarray(self.true_values, dtype=float)
        self.estimates = np.asarray(self.estimates, dtype=float)
        if self.true_values.shape != self.estimates.shape or self.true_values.ndim != 1:
            raise DimensionMismatch(
                f"series shapes differ: {self.true_values.shape} vs {self.estimates.shape}"
            )
        if self.rounds < 1:
            raise DomainError("a metric series needs at least one round")

    @property
    def rounds(self) -> int:
        return int(self.true_values.shape[0])

    def residuals(self) -> np.ndarray:
        return self.estimates - self.true_values


def nrmse(series: MetricSeries) -> float:
    """Root mean square error divided by the mean true value.

    A zero-mean truth series has no meaningful relative error; the
    sentinel NaN is rendered as "undef" downstream, never as 0.
    """
    scale = float(series.true_values.mean())
    if scale == 0.0:
        return math.nan
    resid = series.residuals()
    return float(np.sqrt(np.mean(resid * resid)) / scale)


def rrsd(series: MetricSeries) -> float:
    """Residual standard deviation divided by the mean true value."""
    scale = float(series.true_values.mean())
    if scale == 0.0:
        return math.nan
    return float(np.std(series.residuals()) / scale)


def format_value(value: float) -> str:
    return "undef" if math.isnan(value) else f"{value:.3f}"


def format_cell(nrmse_value: float, rrsd_value: float) -> str:
    return f"{format_value(nrmse_value)}±{format_value(rrsd_value)}"


@dataclass(frozen=True, slots=True)
class ErrorSummary:
    """One table cell: a matchup's error figures for one metric."""

    config_label: str
    focal: str
    metric_kind: str
    row_strategy: str
    col_strategy: str
    nrmse: float
    rrsd: float


@dataclass(slots=True)
class GameResult:
    """Everything one simulated game produced."""

    config: GameConfig
    spec_a: StrategySpec
    spec_b: StrategySpec
    seed: int
    series: dict[tuple[str, str], MetricSeries]
    records: list[tuple[RoundRecord, RoundRecord]]

    def summary(self, player: str, metric_kind: str) -> tuple[float, float]:
        s = self.series[(player, metric_kind)]
        return nrmse(s), rrsd(s)


def _feasible_from_record(
    record: RoundRecord,
    delta_p: int,
    opp_resources: int,
    flags: BoundFlags,
    cache: dict,
) -> FeasibleSet:
    feedback = record.feedback
    if feedback.mode == SEMI_BANDIT:
        outcome = classify_outcomes(feedback)
        bounds = combined_bounds(
            record.player_decision, outcome, delta_p, opp_resources, flags
        )
        key = (record.player, bounds.lower, bounds.upper)
    else:
        key = (record.player, record.player_decision.allocations, feedback.total)
    fs = cache.get(key)
    if fs is None:
        fs = feasible_set(
            record.player_decision, feedback, delta_p, opp_resources, bound_flags=flags
        )
        cache[key] = fs
    return fs


def run_game(
    config: GameConfig,
    spec_a: StrategySpec,
    spec_b: StrategySpec,
    seed: int,
    *,
    bound_flags: BoundFlags = BoundFlags(),
    keep_records: bool = True,
    fs_cache: dict | None = None,
) -> GameResult:
    """Simulate one repeated game and assemble all metric series.

    Feasible sets are memoized on their defining bounds; repeated
    feedback patterns (common under static or converged strategies) then
    reuse all derived statistics. The caller may pass a shared cache to
    extend reuse across games with the same configuration.
    """
    rng = random.Random(seed)
    strategies = {
        "A": make_strategy(spec_a, config.k, config.n_a),
        "B": make_strategy(spec_b, config.k, config.n_b),
    }
    if fs_cache is None:
        fs_cache = {}
    max_memo: dict[tuple, int] = {}
    expected_memo: dict[tuple, Fraction] = {}
    values: dict[tuple[str, str, str], list[float]] = {
        (player, kind, side): []
        for player in ("A", "B")
        for kind in METRIC_KINDS
        for side in ("true", "est")
    }
    records: list[tuple[RoundRecord, RoundRecord]] = []
    for t in range(1, config.horizon + 1):
        rec_a, rec_b = play_round(config, strategies["A"], strategies["B"], rng, t)
        if keep_records:
            records.append((rec_a, rec_b))
        for record in (rec_a, rec_b):
            player = record.player
            delta_p = config.delta(player)
            n_self = config.resources(player)
            n_opp = config.resources(config.opponent(player))
            phi = record.opponent_decision
            truth_key = (player, phi.allocations)
            true_max = max_memo.get(truth_key)
            if true_max is None:
                true_max = max_payoff(phi, n_self, delta_p)
                max_memo[truth_key] = true_max
            true_expected = expected_memo.get(truth_key)
            if true_expected is None:
                true_expected = expected_payoff(phi, n_self, delta_p)
                expected_memo[truth_key] = true_expected
            try:
                fs = _feasible_from_record(record, delta_p, n_opp, bound_flags, fs_cache)
            except InfeasibleFeedback as exc:
                raise InfeasibleFeedback(
                    f"round {t}, player {player}: {exc}"
                ) from exc
            est_max = observable_max_payoff(fs, n_self, delta_p)
            est_sup = supremum_payoff(fs, n_self, delta_p)
            est_expected = observable_expected_payoff(fs, n_self, delta_p)
            values[(player, METRIC_OBSERVABLE_MAX, "true")].append(float(true_max))
            values[(player, METRIC_OBSERVABLE_MAX, "est")].append(float(est_max))
            values[(player, METRIC_SUPREMUM, "true")].append(float(true_max))
            values[(player, METRIC_SUPREMUM, "est")].append(float(est_sup))
            values[(player, METRIC_OBSERVABLE_EXPECTED, "true")].append(
                float(true_expected)
            )
            values[(player, METRIC_OBSERVABLE_EXPECTED, "est")].append(
                float(est_expected)
            )
    series = {
        (player, kind): MetricSeries(
            kind,
            np.array(values[(player, kind, "true")]),
            np.array(values[(player, kind, "est")]),
        )
        for player in ("A", "B")
        for kind in METRIC_KINDS
    }
    return GameResult(config, spec_a, spec_b, seed, series, records)


def derive_game_seed(master_seed: int, config_index: int, matchup_index: int, rep: int = 0) -> int:
    """Stable per-game seed; independent of execution order and platform."""
    material = f"{master_seed}:{config_index}:{matchup_index}:{rep}".encode()
    return int.from_bytes(hashlib.sha256(material).digest()[:8], "big")


@dataclass(slots=True)
class SuiteResult:
    configs: tuple[GameConfig, ...]
    strategies: tuple[StrategySpec, ...]
    seed: int
    summaries: list[ErrorSummary] = field(default_factory=list)

    def tables(self) -> dict[tuple[str, str, str], list[ErrorSummary]]:
        """Group cells by (config label, focal player, metric), row-major."""
        grouped: dict[tuple[str, str, str], list[ErrorSummary]] = {}
        for cell in self.summaries:
            grouped.setdefault(
                (cell.config_label, cell.focal, cell.metric_kind), []
            ).append(cell)
        return grouped

    def cell(
        self, config_label: str, focal: str, metric_kind: str, row: str, col: str
    ) -> ErrorSummary:
        for summary in self.summaries:
            if (
                summary.config_label == config_label
                and summary.focal == focal
                and summary.metric_kind == metric_kind
                and summary.row_strategy == row
                and summary.col_strategy == col
            ):
                return summary
        raise KeyError((config_label, focal, metric_kind, row, col))


def _series_file_name(
    config: GameConfig, focal: str, row_label: str, col_label: str, metric_kind: str
) -> str:
    return f"{config.label()}_focal{focal}_{row_label}_vs_{col_label}_{metric_kind}.csv"


def write_series_csv(path: Path, series: MetricSeries) -> None:
    lines = ["t,y_true,y_est"]
    for t, (y, y_est) in enumerate(zip(series.true_values, series.estimates), start=1):
        lines.append(f"{t},{y:.17g},{y_est:.17g}")
    path.write_text("\n".join(lines) + "\n")


def _run_suite_game(
    task: tuple, fs_cache: dict | None = None, keep_series: bool = False
) -> tuple[dict, dict | None]:
    (config, specs, seed, flags, row, col, series_dir) = task
    result = run_game(
        config,
        specs[row],
        specs[col],
        seed,
        bound_flags=flags,
        keep_records=False,
        fs_cache=fs_cache,
    )
    if series_dir is not None:
        directory = Path(series_dir)
        directory.mkdir(parents=True, exist_ok=True)
        labels = {"A": (specs[row].label(), specs[col].label()), "B": (specs[col].label(), specs[row].label())}
        for (player, kind), series in result.series.items():
            row_label, col_label = labels[player]
            write_series_csv(
                directory / _series_file_name(config, player, row_label, col_label, kind),
                series,
            )
    summaries = {
        (player, kind): result.summary(player, kind)
        for player in ("A", "B")
        for kind in METRIC_KINDS
    }
    return summaries, (result.series if keep_series else None)


def run_suite(
    configs: tuple[GameConfig, ...] = DEFAULT_CONFIGS,
    strategies: tuple[StrategySpec, ...] = DEFAULT_STRATEGIES,
    seed: int = 0,
    *,
    bound_flags: BoundFlags = BoundFlags(),
    repetitions: int = 1,
    jobs: int = 1,
    series_dir: str | Path | None = None,
    series_sink=None,
    progress=None,
) -> SuiteResult:
    """Run every ordered strategy pair on every configuration.

    Per-game seeds derive from (master seed, config index, matchup
    index), so results do not depend on scheduling or on the worker
    count. Repetitions average the per-cell summaries over repeated
    games with fresh derived seeds; the default of one repetition leans
    on the long horizon instead.

    ``series_sink(config, row, col, rep, player, metric_kind, series)``
    receives every per-round series as it is produced; it requires the
    serial path because callables do not cross worker processes.
    """
    if repetitions < 1:
        raise DomainError(f"repetitions must be positive, got {repetitions}")
    if jobs < 1:
        raise DomainError(f"jobs must be positive, got {jobs}")
    if series_sink is not None and jobs != 1:
        raise DomainError("series_sink needs jobs=1")
    n_strats = len(strategies)
    tasks = []
    for ci, config in enumerate(configs):
        for row in range(n_strats):
            for col in range(n_strats):
                matchup = row * n_strats + col
                for rep in range(repetitions):
                    game_seed = derive_game_seed(seed, ci, matchup, rep)
                    tasks.append(
                        (
                            (config, strategies, game_seed, bound_flags, row, col, series_dir),
                            (ci, row, col),
                            rep,
                        )
                    )
    outcomes: dict[tuple[int, int, int], list[dict]] = {}
    if jobs == 1:
        caches: dict[int, dict] = {}
        for task, key, rep in tasks:
            ci, row, col = key
            cache = caches.setdefault(ci, {})
            summaries, series = _run_suite_game(
                task, fs_cache=cache, keep_series=series_sink is not None
            )
            outcomes.setdefault(key, []).append(summaries)
            if series is not None:
                for (player, kind), one in series.items():
                    series_sink(task[0], row, col, rep, player, kind, one)
            if progress is not None:
                progress(key)
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for (task, key, _rep), (summaries, _) in zip(
                tasks, pool.map(_run_suite_game, (t for t, _, _ in tasks))
            ):
                outcomes.setdefault(key, []).append(summaries)
                if progress is not None:
                    progress(key)

    result = SuiteResult(tuple(configs), tuple(strategies), seed)
    for ci, config in enumerate(configs):
        for focal in ("A", "B"):
            for kind in METRIC_KINDS:
                for r in range(n_strats):
                    for c in range(n_strats):
                        # focal A tables are indexed (own, opponent); the
                        # same game fills the transposed focal B cell
                        game_key = (ci, r, c) if focal == "A" else (ci, c, r)
                        reps = outcomes[game_key]
                        nr = _average(x[(focal, kind)][0] for x in reps)
                        rr = _average(x[(focal, kind)][1] for x in reps)
                        result.summaries.append(
                            ErrorSummary(
                                config.label(),
                                focal,
                                kind,
                                strategies[r].label(),
                                strategies[c].label(),
                                nr,
                                rr,
                            )
                        )
    return result


def _average(values) -> float:
    collected = list(values)
    return math.fsum(collected) / len(collected)


def render_table(cells: list[ErrorSummary]) -> str:
    """Human-readable grid of NRMSE±RRSD cells, rows = focal strategy."""
    rows: list[str] = []
    cols: list[str] = []
    for cell in cells:
        if cell.row_strategy not in rows:
            rows.append(cell.row_strategy)
        if cell.col_strategy not in cols:
            cols.append(cell.col_strategy)
    by_pos = {(c.row_strategy, c.col_strategy): c for c in cells}
    width = max(
        [len(r) for r in rows]
        + [max(len(c), 11) for c in cols]
    )
    header = " " * (width + 2) + "  ".join(c.rjust(width) for c in cols)
    lines = [header]
    for r in rows:
        rendered = [
            format_cell(by_pos[(r, c)].nrmse, by_pos[(r, c)].rrsd).rjust(width)
            for c in cols
        ]
        lines.append(r.ljust(width + 2) + "  ".join(rendered))
    return "\n".join(lines)


def write_suite_outputs(result: SuiteResult, out_dir: str | Path) -> list[Path]:
    """Write one CSV per (config, focal player, metric) under out_dir."""
    root = Path(out_dir)
    written: list[Path] = []
    for (config_label, focal, metric_kind), cells in result.tables().items():
        directory = root / config_label
        directory.mkdir(parents=True, exist_ok=True)
        path = directory / f"focal_{focal}_{metric_kind}.csv"
        lines = ["row_strategy,col_strategy,nrmse,rrsd"]
        for cell in cells:
            lines.append(
                f"{cell.row_strategy},{cell.col_strategy},"
                f"{format_value(cell.nrmse)},{format_value(cell.rrsd)}"
            )
        path.write_text("\n".join(lines) + "\n")
        written.append(path)
    return written
