"""Command-line front end.

Subcommands: ``game`` simulates one matchup, ``suite`` runs the full
configuration grid, ``verify`` replays the built-in oracle checks, and
``prune-demo`` prints the feasible-set pipeline step by step for a given
feedback instance. Runs write CSV tables plus a JSON manifest that can
be fed back through ``--config`` to reproduce the run exactly.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__
from .bounds import BoundFlags, classify_outcomes, combined_bounds, table_bounds
from .core import (
    BANDIT,
    FEEDBACK_MODES,
    PLAYERS,
    SEMI_BANDIT,
    Decision,
    Feedback,
    GameConfig,
    PayoffVector,
)
from .errors import BlottoLabError, ConfigError
from .estimators import feasible_set
from .evaluation import (
    DEFAULT_CONFIGS,
    DEFAULT_STRATEGIES,
    K3_CONFIGS,
    METRIC_KINDS,
    SUBSTITUTION_NOTES,
    ErrorSummary,
    SuiteResult,
    format_cell,
    render_table,
    run_game,
    run_suite,
    write_series_csv,
    write_suite_outputs,
)
from .graph import build_graph, edge_list_lines, prune_by_bounds, prune_dead_ends, prune_unreachable
from .strategies import STRATEGY_KINDS, StrategySpec, make_strategy, parse_strategy_spec
from . import verify as verify_mod

OUT_DIR_ENV = "BLOTTO_LAB_OUT"
SUITE_NAMES = ("paper", "k3")


@dataclass(slots=True)
class RunConfig:
    """Fully validated description of one CLI run."""

    command: str
    k: int = 3
    n_a: int = 10
    n_b: int = 10
    draw_winner: str = "B"
    horizon: int = 1000
    feedback_mode: str = SEMI_BANDIT
    strategy_a: StrategySpec = field(default_factory=lambda: StrategySpec.of("uniform-random"))
    strategy_b: StrategySpec = field(default_factory=lambda: StrategySpec.of("uniform-random"))
    suite: str = "paper"
    seed: int = 0
    out_dir: str = "results"
    bound_flags: BoundFlags = field(default_factory=BoundFlags)
    oracle_samples: int = 1000
    dump_series: bool = False
    jobs: int = 1
    repetitions: int = 1

    def __post_init__(self) -> None:
        if self.command not in ("game", "suite"):
            raise ConfigError(f"unknown command {self.command!r}")
        if self.k < 1:
            raise ConfigError(f"K must be positive, got {self.k}")
        if self.n_a < 1 or self.n_b < 1:
            raise ConfigError(f"budgets must be positive, got NA={self.n_a} NB={self.n_b}")
        if self.horizon < 1:
            raise ConfigError(f"T must be positive, got {self.horizon}")
        if self.draw_winner not in PLAYERS:
            raise ConfigError(f"draw-winner must be A or B, got {self.draw_winner!r}")
        if self.feedback_mode not in FEEDBACK_MODES:
            raise ConfigError(f"feedback must be one of {FEEDBACK_MODES}")
        if self.suite not in SUITE_NAMES:
            raise ConfigError(f"suite must be one of {SUITE_NAMES}, got {self.suite!r}")
        if self.oracle_samples < 1:
            raise ConfigError(f"samples must be positive, got {self.oracle_samples}")
        if self.jobs < 1:
            raise ConfigError(f"jobs must be positive, got {self.jobs}")
        if self.repetitions < 1:
            raise ConfigError(f"repetitions must be positive, got {self.repetitions}")
        for spec in (self.strategy_a, self.strategy_b):
            if spec.kind not in STRATEGY_KINDS:
                raise ConfigError(
                    f"unknown strategy kind {spec.kind!r}; choose from {list(STRATEGY_KINDS)}"
                )

    def game_config(self) -> GameConfig:
        return GameConfig(
            k=self.k,
            n_a=self.n_a,
            n_b=self.n_b,
            draw_winner=self.draw_winner,
            horizon=self.horizon,
            feedback_mode=self.feedback_mode,
        )

    def suite_configs(self) -> tuple[GameConfig, ...]:
        base = DEFAULT_CONFIGS if self.suite == "paper" else K3_CONFIGS
        if self.horizon == 1000:
            return base
        return tuple(
            GameConfig(
                k=c.k,
                n_a=c.n_a,
                n_b=c.n_b,
                draw_winner=c.draw_winner,
                horizon=self.horizon,
                feedback_mode=c.feedback_mode,
            )
            for c in base
        )

    def suite_strategies(self) -> tuple[StrategySpec, ...]:
        specs = []
        for spec in DEFAULT_STRATEGIES:
            if spec.kind == "ucb-combinatorial" and self.oracle_samples != 1000:
                params = dict(spec.params)
                params["samples"] = self.oracle_samples
                spec = StrategySpec.of(spec.kind, **params)
            specs.append(spec)
        return tuple(specs)


def build_manifest(rc: RunConfig) -> dict:
    if rc.command == "suite":
        configs = rc.suite_configs()
        strategy_part = {
            "suite": rc.suite,
            "strategies": [s.to_dict() for s in rc.suite_strategies()],
        }
        kinds = [s.kind for s in rc.suite_strategies()]
    else:
        configs = (rc.game_config(),)
        strategy_part = {
            "strategy_a": rc.strategy_a.to_dict(),
            "strategy_b": rc.strategy_b.to_dict(),
        }
        kinds = [rc.strategy_a.kind, rc.strategy_b.kind]
    return {
        "version": __version__,
        "command": rc.command,
        "seed": rc.seed,
        "out_dir": rc.out_dir,
        "bound_flags": list(rc.bound_flags.to_names()),
        "oracle_samples": rc.oracle_samples,
        "dump_series": rc.dump_series,
        "jobs": rc.jobs,
        "repetitions": rc.repetitions,
        "configs": [
            {
                "k": c.k,
                "n_a": c.n_a,
                "n_b": c.n_b,
                "draw_winner": c.draw_winner,
                "horizon": c.horizon,
                "feedback_mode": c.feedback_mode,
            }
            for c in configs
        ],
        **strategy_part,
        "substitutions": {kind: SUBSTITUTION_NOTES[kind] for kind in sorted(set(kinds))},
    }


def _merge(flag_value, file_value, default):
    """CLI flag wins over config file wins over the built-in default."""
    if flag_value is not None:
        return flag_value
    if file_value is not None:
        return file_value
    return default


def parse_config(args: argparse.Namespace) -> RunConfig:
    data: dict = {}
    if getattr(args, "config", None):
        path = Path(args.config)
        try:
            data = json.loads(path.read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError(f"config {path} must hold a JSON object")
    file_configs = data.get("configs") or [{}]
    first = file_configs[0] if isinstance(file_configs, list) else {}

    def from_file(key, sub=None):
        if sub is not None:
            return sub.get(key)
        return data.get(key)

    command = args.command
    out_default = os.environ.get(OUT_DIR_ENV, "results")
    bounds_raw = _merge(getattr(args, "bounds", None), data.get("bound_flags"), None)
    if bounds_raw is None:
        flags = BoundFlags()  # plain table bounds; tighter variants are opt-in
    elif isinstance(bounds_raw, str):
        flags = BoundFlags.from_names(n.strip() for n in bounds_raw.split(",") if n.strip())
    else:
        flags = BoundFlags.from_names(bounds_raw)

    def spec_of(flag_text, file_key):
        if flag_text is not None:
            return parse_strategy_spec(flag_text)
        raw = data.get(file_key)
        if raw is not None:
            return StrategySpec.from_dict(raw)
        return StrategySpec.of("uniform-random")

    rc = RunConfig(
        command=command,
        k=_merge(getattr(args, "K", None), from_file("k", first), 3),
        n_a=_merge(getattr(args, "NA", None), from_file("n_a", first), 10),
        n_b=_merge(getattr(args, "NB", None), from_file("n_b", first), 10),
        draw_winner=_merge(
            getattr(args, "draw_winner", None), from_file("draw_winner", first), "B"
        ),
        horizon=_merge(getattr(args, "T", None), from_file("horizon", first), 1000),
        feedback_mode=_merge(
            getattr(args, "feedback", None), from_file("feedback_mode", first), SEMI_BANDIT
        ),
        strategy_a=spec_of(getattr(args, "strategy_a", None), "strategy_a"),
        strategy_b=spec_of(getattr(args, "strategy_b", None), "strategy_b"),
        suite=_merge(getattr(args, "suite", None), data.get("suite"), "paper"),
        seed=_merge(getattr(args, "seed", None), data.get("seed"), 0),
        out_dir=_merge(getattr(args, "out", None), data.get("out_dir"), out_default),
        bound_flags=flags,
        oracle_samples=_merge(
            getattr(args, "samples", None), data.get("oracle_samples"), 1000
        ),
        dump_series=bool(
            _merge(
                getattr(args, "dump_series", None) or None,
                data.get("dump_series"),
                False,
            )
        ),
        jobs=_merge(getattr(args, "jobs", None), data.get("jobs"), 1),
        repetitions=_merge(getattr(args, "repetitions", None), data.get("repetitions"), 1),
    )
    for spec in (rc.strategy_a, rc.strategy_b) if rc.command == "game" else rc.suite_strategies():
        make_strategy(spec, rc.k, max(rc.n_a, rc.n_b))  # fail fast on bad parameters
    return rc


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=int, help="master seed (default 0)")
    parser.add_argument("--out", help=f"output directory (default ${OUT_DIR_ENV} or results/)")
    parser.add_argument(
        "--bounds",
        help="comma list: table,tight-upper,tight-lower,general-lower (default: table)",
    )
    parser.add_argument("--samples", type=int, help="argmax-oracle sample size S (default 1000)")
    parser.add_argument("--dump-series", action="store_true", dest="dump_series")
    parser.add_argument("--config", help="JSON manifest from a previous run")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="blotto-lab",
        description="Repeated Blotto games with payoff estimation from own feedback",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    game = sub.add_parser("game", help="simulate one matchup")
    game.add_argument("--K", type=int, help="battlefield count")
    game.add_argument("--NA", type=int, help="player A budget")
    game.add_argument("--NB", type=int, help="player B budget")
    game.add_argument("--T", type=int, help="rounds (default 1000)")
    game.add_argument("--draw-winner", dest="draw_winner", choices=PLAYERS)
    game.add_argument("--feedback", choices=(SEMI_BANDIT, BANDIT))
    game.add_argument("--strategy-a", dest="strategy_a", help="e.g. exp3-edge:gamma=0.25")
    game.add_argument("--strategy-b", dest="strategy_b")
    _add_common(game)

    suite = sub.add_parser("suite", help="run the full configuration grid")
    suite.add_argument("--suite", choices=SUITE_NAMES, help="paper (6 configs) or k3 (3)")
    suite.add_argument("--T", type=int, help="rounds per game (default 1000)")
    suite.add_argument("--jobs", type=int, help="parallel games (default 1)")
    suite.add_argument("--repetitions", type=int, help="repeated games per cell (default 1)")
    _add_common(suite)

    ver = sub.add_parser("verify", help="run built-in oracle checks")
    ver.add_argument("--seed", type=int, default=0)

    demo = sub.add_parser("prune-demo", help="walk the feasible-set pipeline once")
    demo.add_argument("--pi", required=True, help="own allocation, e.g. 1,3,2")
    demo.add_argument("--payoff", required=True, help="per-battlefield wins (1=won), e.g. 0,1,0")
    demo.add_argument("--delta", type=int, default=0, choices=(0, 1))
    demo.add_argument("--opp-resources", dest="opp_resources", type=int, required=True)
    demo.add_argument(
        "--bounds",
        help="comma list: table,tight-upper,tight-lower,general-lower (default: table)",
    )
    return parser


def _run_game_command(rc: RunConfig) -> int:
    config = rc.game_config()
    result = run_game(
        config,
        rc.strategy_a,
        rc.strategy_b,
        rc.seed,
        bound_flags=rc.bound_flags,
        keep_records=False,
    )
    labels = {
        "A": (rc.strategy_a.label(), rc.strategy_b.label()),
        "B": (rc.strategy_b.label(), rc.strategy_a.label()),
    }
    suite_like = SuiteResult((config,), (rc.strategy_a, rc.strategy_b), rc.seed)
    for player in ("A", "B"):
        row_label, col_label = labels[player]
        print(f"focal {player} ({row_label} vs {col_label}):")
        for kind in METRIC_KINDS:
            nr, rr = result.summary(player, kind)
            print(f"  {kind}: {format_cell(nr, rr)}")
            suite_like.summaries.append(
                ErrorSummary(config.label(), player, kind, row_label, col_label, nr, rr)
            )
    out = Path(rc.out_dir)
    written = write_suite_outputs(suite_like, out)
    if rc.dump_series:
        series_dir = out / config.label() / "series"
        series_dir.mkdir(parents=True, exist_ok=True)
        for (player, kind), series in result.series.items():
            row_label, col_label = labels[player]
            name = f"{config.label()}_focal{player}_{row_label}_vs_{col_label}_{kind}.csv"
            write_series_csv(series_dir / name, series)
    _write_manifest(rc, out)
    print(f"wrote {len(written)} tables and manifest.json under {out}/")
    return 0


def _run_suite_command(rc: RunConfig) -> int:
    configs = rc.suite_configs()
    strategies = rc.suite_strategies()
    total = len(configs) * len(strategies) ** 2 * rc.repetitions
    done = {"n": 0}

    def progress(_key):
        done["n"] += 1
        print(f"\r{done['n']}/{total} games", end="", file=sys.stderr, flush=True)

    out = Path(rc.out_dir)
    series_dir = out / "series" if rc.dump_series else None
    result = run_suite(
        configs,
        strategies,
        rc.seed,
        bound_flags=rc.bound_flags,
        repetitions=rc.repetitions,
        jobs=rc.jobs,
        series_dir=series_dir,
        progress=progress,
    )
    print(file=sys.stderr)
    written = write_suite_outputs(result, out)
    _write_manifest(rc, out)
    for (config_label, focal, kind), cells in sorted(result.tables().items()):
        print(f"{config_label} focal {focal} {kind}:")
        print(render_table(cells))
        print()
    print(f"wrote {len(written)} tables and manifest.json under {out}/")
    return 0


def _write_manifest(rc: RunConfig, out: Path) -> None:
    out.mkdir(parents=True, exist_ok=True)
    manifest = build_manifest(rc)
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def _parse_int_list(text: str, flag: str) -> tuple[int, ...]:
    try:
        return tuple(int(part) for part in text.split(","))
    except ValueError as exc:
        raise ConfigError(f"{flag} expects comma-separated integers, got {text!r}") from exc


def _run_prune_demo(args: argparse.Namespace) -> int:
    pi_alloc = _parse_int_list(args.pi, "--pi")
    wins = _parse_int_list(args.payoff, "--payoff")
    if len(wins) != len(pi_alloc) or any(x not in (0, 1) for x in wins):
        raise ConfigError("--payoff needs one 0/1 flag per battlefield")
    flags = (
        BoundFlags()
        if args.bounds is None
        else BoundFlags.from_names(n.strip() for n in args.bounds.split(",") if n.strip())
    )
    pi = Decision.of(pi_alloc)
    k = pi.k
    n_opp = args.opp_resources
    payoff = PayoffVector.of(wins)
    outcome = classify_outcomes(payoff)
    plain = table_bounds(pi, outcome, args.delta, n_opp)
    bounds = combined_bounds(pi, outcome, args.delta, n_opp, flags)
    print(f"own decision {pi.allocations}, delta {args.delta}, opponent budget {n_opp}")
    print(f"won battlefields {sorted(outcome.won)}, lost {sorted(outcome.lost)}")
    print(f"table bounds     lower={plain.lower} upper={plain.upper}")
    print(f"combined bounds  lower={bounds.lower} upper={bounds.upper}")
    def edge_count(g):
        return sum(1 for _ in g.edges())

    base = build_graph(k, n_opp)
    print(f"base graph: {edge_count(base)} edges, {base.count()} decisions")
    windowed = prune_by_bounds(base, bounds)
    print(f"after bound pruning: {edge_count(windowed)} edges")
    trimmed = prune_dead_ends(windowed)
    print(f"after dead-end removal: {edge_count(trimmed)} edges")
    clean = prune_unreachable(trimmed)
    print(f"after unreachable removal: {edge_count(clean)} edges")
    for line in edge_list_lines(clean):
        print(f"  {line}")
    fs = feasible_set(
        pi,
        Feedback.semi_bandit(payoff, 1),
        args.delta,
        n_opp,
        bound_flags=flags,
    )
    decisions = sorted(d.allocations for d in fs.decisions())
    print(f"feasible decisions ({len(decisions)}):")
    for alloc in decisions:
        print(f"  {alloc}")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.command == "verify":
            return 0 if verify_mod.run_all(seed=args.seed) else 1
        if args.command == "prune-demo":
            return _run_prune_demo(args)
        rc = parse_config(args)
        if rc.command == "game":
            return _run_game_command(rc)
        return _run_suite_command(rc)
    except BlottoLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
