"""Per-battlefield bounds on the opponent's hidden allocation.

After a semi-bandit round the focal player knows its own decision pi,
its draw bias delta, the opponent's budget N', and which battlefields it
won (set W) or lost (set L). Each outcome constrains the opponent's
allocation on that battlefield, and the loss amounts interact through
the opponent's budget. The resulting per-battlefield intervals feed the
graph pruning pipeline; tighter optional variants are available behind
flags but are off by default.

Battlefield indices are 0-based throughout.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .core import Decision, Feedback, PayoffVector
from .errors import DimensionMismatch, DomainError, UnsupportedFeedback
from .graph import build_graph, decision_array

__all__ = [
    "BattlefieldOutcome",
    "AllocationBounds",
    "BoundFlags",
    "classify_outcomes",
    "table_bounds",
    "tight_upper_bounds",
    "general_lower_bounds",
    "tight_lower_bounds",
    "combined_bounds",
    "bandit_feasible_filter",
]


@dataclass(frozen=True, slots=True)
class BattlefieldOutcome:
    """Partition of battlefield indices into won and lost for one player."""

    won: frozenset[int]
    lost: frozenset[int]

    def __post_init__(self) -> None:
        if self.won & self.lost:
            raise DomainError(f"battlefields both won and lost: {sorted(self.won & self.lost)}")
        k = len(self.won) + len(self.lost)
        if self.won | self.lost != frozenset(range(k)):
            raise DomainError("won/lost sets must partition 0..K-1")

    @property
    def k(self) -> int:
        return len(self.won) + len(self.lost)


@dataclass(frozen=True, slots=True)
class AllocationBounds:
    """Closed per-battlefield intervals [lower_i, upper_i] for the opponent."""

    lower: tuple[int, ...]
    upper: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.lower) != len(self.upper):
            raise DimensionMismatch(
                f"lower has {len(self.lower)} entries, upper has {len(self.upper)}"
            )

    @property
    def k(self) -> int:
        return len(self.lower)

    def admits(self, allocation: Sequence[int]) -> bool:
        if len(allocation) != self.k:
            raise DimensionMismatch(
                f"allocation covers {len(allocation)} battlefields, bounds cover {self.k}"
            )
        return all(lo <= a <= hi for lo, a, hi in zip(self.lower, allocation, self.upper))


@dataclass(frozen=True, slots=True)
class BoundFlags:
    """Which optional bound variants to apply on top of the defaults."""

    tight_upper: bool = False
    general_lower: bool = False
    tight_lower: bool = False

    _NAMES = {
        "table": (),
        "tight-upper": ("tight_upper",),
        "general-lower": ("general_lower",),
        "tight-lower": ("tight_lower",),
    }

    @classmethod
    def all_enhancements(cls) -> "BoundFlags":
        return cls(tight_upper=True, general_lower=True, tight_lower=True)

    @classmethod
    def from_names(cls, names: Iterable[str]) -> "BoundFlags":
        enabled: dict[str, bool] = {}
        for name in names:
            attrs = cls._NAMES.get(name.strip())
            if attrs is None:
                raise DomainError(
                    f"unknown bound flag {name!r}; choose from {sorted(cls._NAMES)}"
                )
            for attr in attrs:
                enabled[attr] = True
        return cls(**enabled)

    def to_names(self) -> list[str]:
        names = []
        if self.tight_upper:
            names.append("tight-upper")
        if self.general_lower:
            names.append("general-lower")
        if self.tight_lower:
            names.append("tight-lower")
        return names or ["table"]


def classify_outcomes(feedback: Feedback | PayoffVector) -> BattlefieldOutcome:
    """Split battlefields into won/lost from a per-battlefield payoff."""
    if isinstance(feedback, Feedback):
        if feedback.payoff is None:
            raise UnsupportedFeedback(
                "bandit feedback has no per-battlefield outcomes to classify"
            )
        payoff = feedback.payoff
    else:
        payoff = feedback
    indicators = payoff.per_battlefield
    won = frozenset(i for i, x in enumerate(indicators) if x == 1)
    lost = frozenset(i for i, x in enumerate(indicators) if x == 0)
    return BattlefieldOutcome(won, lost)


def _clamp(x: int, n_opp: int) -> int:
    return max(0, min(int(x), n_opp))


def _check_inputs(pi: Decision, outcome: BattlefieldOutcome, delta_p: int) -> None:
    if pi.k != outcome.k:
        raise DimensionMismatch(
            f"decision covers {pi.k} battlefields, outcome covers {outcome.k}"
        )
    if delta_p not in (0, 1):
        raise DomainError(f"draw bias must be 0 or 1, got {delta_p}")


def table_bounds(
    pi: Decision, outcome: BattlefieldOutcome, delta_p: int, opp_resources: int
) -> AllocationBounds:
    """Default bounds from one round of semi-bandit feedback.

    Won battlefield i: the opponent allocated at most pi_i + delta - 1
    (anything higher would have beaten us) and possibly as little as 0.
    Lost battlefield i: at least pi_i + delta, and at most the budget
    left after paying the minimum on the other lost battlefields.
    """
    _check_inputs(pi, outcome, delta_p)
    loss_cost = {i: pi[i] + delta_p for i in outcome.lost}
    loss_total = sum(loss_cost.values())
    lower = []
    upper = []
    for i in range(pi.k):
        if i in outcome.won:
            lower.append(0)
            upper.append(_clamp(pi[i] + delta_p - 1, opp_resources))
        else:
            lower.append(_clamp(loss_cost[i], opp_resources))
            upper.append(_clamp(opp_resources - (loss_total - loss_cost[i]), opp_resources))
    return AllocationBounds(tuple(lower), tuple(upper))


def tight_upper_bounds(
    pi: Decision, outcome: BattlefieldOutcome, delta_p: int, opp_resources: int
) -> AllocationBounds:
    """Upper bounds sharpened by charging every loss against the budget.

    The budget-residual bound N' - sum of other losses' minimums is valid
    for won battlefields too, and beats pi_i + delta - 1 exactly when the
    losses were expensive. Lower bounds are the table ones.
    """
    _check_inputs(pi, outcome, delta_p)
    base = table_bounds(pi, outcome, delta_p, opp_resources)
    loss_total = sum(pi[i] + delta_p for i in outcome.lost)
    upper = []
    for i in range(pi.k):
        residual = opp_resources - (loss_total - (pi[i] + delta_p if i in outcome.lost else 0))
        upper.append(min(base.upper[i], _clamp(residual, opp_resources)))
    return AllocationBounds(base.lower, tuple(upper))


def general_lower_bounds(
    pi: Decision, outcome: BattlefieldOutcome, delta_p: int, opp_resources: int
) -> AllocationBounds:
    """Lower bounds that also charge the opponent for battlefields we won.

    On a won battlefield the opponent spent at most pi_i + delta - 1;
    summing those caps with the loss minimums bounds how little could
    have gone to battlefield i. Usually weaker than the table lower
    bound but occasionally positive where the table gives 0.
    """
    _check_inputs(pi, outcome, delta_p)
    base = table_bounds(pi, outcome, delta_p, opp_resources)
    loss_total = sum(pi[j] + delta_p for j in outcome.lost)
    win_caps = {j: pi[j] + delta_p - 1 for j in outcome.won}
    win_total = sum(win_caps.values())
    n_lost = len(outcome.lost)
    lower = []
    for i in range(pi.k):
        in_lost = 1 if i in outcome.lost else 0
        value = (
            pi[i] * in_lost
            + (n_lost - 1 - in_lost) * (loss_total - opp_resources)
            - (win_total - (win_caps[i] if i in outcome.won else 0))
        )
        lower.append(max(base.lower[i], _clamp(value, opp_resources)))
    return AllocationBounds(tuple(lower), base.upper)


def tight_lower_bounds(
    pi: Decision, outcome: BattlefieldOutcome, delta_p: int, opp_resources: int
) -> AllocationBounds:
    """Budget-comparison lower bounds, valid only with at most one loss.

    When the opponent outspent us overall and we lost nowhere else, it
    must have parked a provable surplus on each battlefield. Applies per
    battlefield i only when the losses are a subset of {i} and the
    budget comparison is strict; elsewhere the table bound stands.
    """
    _check_inputs(pi, outcome, delta_p)
    base = table_bounds(pi, outcome, delta_p, opp_resources)
    n_player = pi.owner_resources
    k = pi.k
    lower = list(base.lower)
    for i in range(k):
        if not outcome.lost <= {i}:
            continue
        in_lost = 1 if i in outcome.lost else 0
        condition = n_player + 2 * delta_p * in_lost < (
            opp_resources + pi[i] * (1 - in_lost) + (k - 1) * (1 - delta_p)
        )
        if condition:
            value = (
                opp_resources
                - n_player
                + pi[i]
                - delta_p * in_lost
                + (k - 1) * (1 - delta_p)
            )
            lower[i] = max(lower[i], _clamp(value, opp_resources))
    return AllocationBounds(tuple(lower), base.upper)


def combined_bounds(
    pi: Decision,
    outcome: BattlefieldOutcome,
    delta_p: int,
    opp_resources: int,
    flags: BoundFlags = BoundFlags(),
) -> AllocationBounds:
    """Table bounds plus whichever optional variants the flags enable.

    Lower bounds combine by max and upper bounds by min; every variant
    is individually valid, so the intersection still brackets the truth.
    """
    result = table_bounds(pi, outcome, delta_p, opp_resources)
    lower = list(result.lower)
    upper = list(result.upper)
    if flags.tight_upper:
        tu = tight_upper_bounds(pi, outcome, delta_p, opp_resources)
        upper = [min(a, b) for a, b in zip(upper, tu.upper)]
    if flags.general_lower:
        gl = general_lower_bounds(pi, outcome, delta_p, opp_resources)
        lower = [max(a, b) for a, b in zip(lower, gl.lower)]
    if flags.tight_lower:
        tl = tight_lower_bounds(pi, outcome, delta_p, opp_resources)
        lower = [max(a, b) for a, b in zip(lower, tl.lower)]
    return AllocationBounds(tuple(lower), tuple(upper))


def bandit_feasible_filter(
    pi: Decision, observed_total: int, delta_p: int, opp_resources: int
) -> list[Decision]:
    """Opponent decisions consistent with a bandit (total-only) observation.

    Exhaustive: enumerates the opponent's full decision space and keeps
    the decisions against which pi scores exactly observed_total. Meant
    for desk-scale budgets; the decision space grows combinatorially.
    """
    if delta_p not in (0, 1):
        raise DomainError(f"draw bias must be 0 or 1, got {delta_p}")
    if not 0 <= observed_total <= pi.k:
        raise DomainError(f"total payoff must lie in [0, {pi.k}], got {observed_total}")
    candidates = decision_array(build_graph(pi.k, opp_resources))
    mine = np.asarray(pi.allocations, dtype=np.int64)
    totals = (mine + delta_p > candidates).sum(axis=1)
    keep = candidates[totals == observed_total]
    return [Decision(tuple(int(x) for x in row), opp_resources) for row in keep]
