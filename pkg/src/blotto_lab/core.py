"""Core types and round mechanics for the repeated Colonel Blotto game.

Two players split integer resources across K battlefields each round. A
battlefield is won by the larger allocation; the player holding the draw
advantage also wins ties. Payoff is the number of battlefields won, so
the stage game is constant-sum: the two totals always add up to K.

This module knows nothing about graphs, estimation, or learning. It
defines the value objects (decisions, payoffs, feedback, round records)
and the referee logic that the rest of the package builds on.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Iterable, Protocol, Sequence

from .errors import ConfigError, DimensionMismatch, DomainError, StrategyFault

SEMI_BANDIT = "semi-bandit"
BANDIT = "bandit"
FEEDBACK_MODES = (SEMI_BANDIT, BANDIT)

PLAYERS = ("A", "B")

__all__ = [
    "SEMI_BANDIT",
    "BANDIT",
    "FEEDBACK_MODES",
    "PLAYERS",
    "Decision",
    "PayoffVector",
    "Feedback",
    "RoundRecord",
    "GameConfig",
    "PlayerStrategy",
    "payoff_vector",
    "regret",
    "play_round",
]


@dataclass(frozen=True, slots=True)
class Decision:
    """An allocation of one player's full budget across the battlefields.

    Immutable and validated at construction: every component is a
    non-negative integer and the components sum to ``owner_resources``.
    """

    allocations: tuple[int, ...]
    owner_resources: int

    def __post_init__(self) -> None:
        if len(self.allocations) == 0:
            raise DomainError("a decision needs at least one battlefield")
        if any(not isinstance(a, int) or a < 0 for a in self.allocations):
            raise DomainError(f"allocations must be non-negative integers: {self.allocations}")
        total = sum(self.allocations)
        if total != self.owner_resources:
            raise DomainError(
                f"allocations sum to {total}, expected owner_resources={self.owner_resources}"
            )

    @classmethod
    def of(cls, allocations: Iterable[int]) -> "Decision":
        """Build a decision whose budget is inferred from the components."""
        alloc = tuple(int(a) for a in allocations)
        return cls(alloc, sum(alloc))

    @property
    def k(self) -> int:
        return len(self.allocations)

    def __iter__(self):
        return iter(self.allocations)

    def __getitem__(self, i: int) -> int:
        return self.allocations[i]


@dataclass(frozen=True, slots=True)
class PayoffVector:
    """Per-battlefield win indicators plus their sum for one player."""

    per_battlefield: tuple[int, ...]
    total: int

    def __post_init__(self) -> None:
        if any(x not in (0, 1) for x in self.per_battlefield):
            raise DomainError(f"win indicators must be 0 or 1: {self.per_battlefield}")
        if self.total != sum(self.per_battlefield):
            raise DomainError("total does not match per-battlefield indicators")

    @classmethod
    def of(cls, indicators: Iterable[int]) -> "PayoffVector":
        ind = tuple(int(x) for x in indicators)
        return cls(ind, sum(ind))


@dataclass(frozen=True, slots=True)
class Feedback:
    """What a player is shown after a round.

    Semi-bandit feedback carries the full win/loss vector; bandit
    feedback carries only the total. ``payoff`` is None in bandit mode,
    there is no hidden copy of the vector.
    """

    mode: str
    total: int
    payoff: PayoffVector | None
    round_index: int

    @classmethod
    def semi_bandit(cls, payoff: PayoffVector, round_index: int) -> "Feedback":
        return cls(SEMI_BANDIT, payoff.total, payoff, round_index)

    @classmethod
    def bandit(cls, total: int, round_index: int) -> "Feedback":
        return cls(BANDIT, total, None, round_index)


@dataclass(frozen=True, slots=True)
class RoundRecord:
    """One player's view of a finished round, plus the referee's truth.

    ``opponent_decision`` is the referee's record for oracle checks and
    evaluation; it is never part of ``feedback`` and must not reach
    strategies or estimators.
    """

    round_index: int
    player: str
    player_decision: Decision
    opponent_decision: Decision
    feedback: Feedback


@dataclass(frozen=True, slots=True)
class GameConfig:
    """Static description of a repeated game instance."""

    k: int
    n_a: int
    n_b: int
    draw_winner: str = "B"
    horizon: int = 1000
    feedback_mode: str = SEMI_BANDIT

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ConfigError(f"need at least one battlefield, got k={self.k}")
        if self.n_a < 0 or self.n_b < 0:
            raise ConfigError("resource budgets must be non-negative")
        if self.draw_winner not in PLAYERS:
            raise ConfigError(f"draw_winner must be one of {PLAYERS}, got {self.draw_winner!r}")
        if self.horizon < 1:
            raise ConfigError(f"horizon must be positive, got {self.horizon}")
        if self.feedback_mode not in FEEDBACK_MODES:
            raise ConfigError(f"unknown feedback mode {self.feedback_mode!r}")

    def resources(self, player: str) -> int:
        self._check_player(player)
        return self.n_a if player == "A" else self.n_b

    def delta(self, player: str) -> int:
        """Draw bias: 1 for the player that wins ties, 0 for the other."""
        self._check_player(player)
        return 1 if player == self.draw_winner else 0

    @staticmethod
    def opponent(player: str) -> str:
        GameConfig._check_player(player)
        return "B" if player == "A" else "A"

    @staticmethod
    def _check_player(player: str) -> None:
        if player not in PLAYERS:
            raise ConfigError(f"unknown player {player!r}")

    def label(self) -> str:
        return f"K{self.k}_NA{self.n_a}_NB{self.n_b}"


class PlayerStrategy(Protocol):
    """Minimal interface the referee needs from a strategy."""

    kind: str

    def choose(self, t: int, rng: random.Random) -> Decision: ...

    def observe(self, decision: Decision, feedback: Feedback) -> None: ...


def payoff_vector(
    player_decision: Decision | Sequence[int],
    opponent_decision: Decision | Sequence[int],
    delta_p: int,
) -> PayoffVector:
    """Score one round from the focal player's side.

    Battlefield i is won when ``player_i + delta_p > opponent_i``, so a
    draw-advantaged player (delta 1) wins exact ties.
    """
    mine = tuple(player_decision)
    theirs = tuple(opponent_decision)
    if len(mine) != len(theirs):
        raise DimensionMismatch(
            f"decisions cover {len(mine)} and {len(theirs)} battlefields"
        )
    if delta_p not in (0, 1):
        raise DomainError(f"draw bias must be 0 or 1, got {delta_p}")
    return PayoffVector.of(1 if m + delta_p > o else 0 for m, o in zip(mine, theirs))


def regret(
    decision_a: Decision | Sequence[int],
    decision_b: Decision | Sequence[int],
    opponent_decision: Decision | Sequence[int],
    delta_p: int,
) -> int:
    """Payoff difference of playing ``decision_a`` over ``decision_b``."""
    gain_a = payoff_vector(decision_a, opponent_decision, delta_p).total
    gain_b = payoff_vector(decision_b, opponent_decision, delta_p).total
    return gain_a - gain_b


def _validated_choice(
    strategy: PlayerStrategy, player: str, config: GameConfig, t: int, rng: random.Random
) -> Decision:
    decision = strategy.choose(t, rng)
    kind = getattr(strategy, "kind", type(strategy).__name__)
    if not isinstance(decision, Decision):
        raise StrategyFault(f"strategy {kind!r} for player {player} returned {type(decision).__name__}")
    if decision.k != config.k or decision.owner_resources != config.resources(player):
        raise StrategyFault(
            f"strategy {kind!r} for player {player} returned a decision for "
            f"k={decision.k}, n={decision.owner_resources}; expected "
            f"k={config.k}, n={config.resources(player)}"
        )
    return decision


def _feedback_for(config: GameConfig, payoff: PayoffVector, t: int) -> Feedback:
    if config.feedback_mode == SEMI_BANDIT:
        return Feedback.semi_bandit(payoff, t)
    return Feedback.bandit(payoff.total, t)


def play_round(
    config: GameConfig,
    strategy_a: PlayerStrategy,
    strategy_b: PlayerStrategy,
    rng: random.Random,
    round_index: int = 1,
) -> tuple[RoundRecord, RoundRecord]:
    """Run one simultaneous round and feed both strategies their feedback.

    Returns the records for players A and B in that order. The same rng
    drives both strategies (A first), so a fixed seed fixes the round.
    """
    dec_a = _validated_choice(strategy_a, "A", config, round_index, rng)
    dec_b = _validated_choice(strategy_b, "B", config, round_index, rng)

    pay_a = payoff_vector(dec_a, dec_b, config.delta("A"))
    pay_b = payoff_vector(dec_b, dec_a, config.delta("B"))

    fb_a = _feedback_for(config, pay_a, round_index)
    fb_b = _feedback_for(config, pay_b, round_index)
    strategy_a.observe(dec_a, fb_a)
    strategy_b.observe(dec_b, fb_b)

    rec_a = RoundRecord(round_index, "A", dec_a, dec_b, fb_a)
    rec_b = RoundRecord(round_index, "B", dec_b, dec_a, fb_b)
    return rec_a, rec_b
