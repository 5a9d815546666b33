"""True payoff metrics and their feedback-based estimators.

Each round has two reference quantities for the focal player: the Max
Payoff (best achievable against the opponent's actual decision) and the
Expected Payoff (mean payoff of a uniformly random own decision against
it). The player cannot compute either - the opponent's decision is
hidden - but feedback confines that decision to a feasible set, and the
estimators summarize the metric over it:

* observable max: mean Max Payoff over the feasible set,
* supremum: minimum Max Payoff over the feasible set (never exceeds the
  true Max Payoff, because the true decision is in the set),
* observable expected: mean Expected Payoff over the feasible set.

Expectations default to uniform weights (the uniform-decision
assumption) and are computed as exact rationals; callers convert to
float for reporting.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

import numpy as np

from .bounds import (
    AllocationBounds,
    BoundFlags,
    bandit_feasible_filter,
    classify_outcomes,
    combined_bounds,
)
from .core import BANDIT, SEMI_BANDIT, Decision, Feedback, payoff_vector
from .errors import (
    DimensionMismatch,
    DomainError,
    EmptySupport,
    InfeasibleFeedback,
    UnsupportedFeedback,
)
from .graph import (
    DecisionGraph,
    allocation_marginal_counts,
    build_graph,
    count_decisions,
    decision_array,
    enumerate_decisions,
    prune_by_bounds,
    prune_dead_ends,
)

__all__ = [
    "DecisionDistribution",
    "FeasibleSet",
    "max_payoff",
    "max_payoff_bruteforce",
    "expected_payoff",
    "feasible_set",
    "observable_max_payoff",
    "supremum_payoff",
    "observable_expected_payoff",
]


def _as_alloc(decision: Decision | Sequence[int]) -> tuple[int, ...]:
    if isinstance(decision, Decision):
        return decision.allocations
    return tuple(int(x) for x in decision)


class DecisionDistribution:
    """Weights over a decision set: uniform by default, explicit on request."""

    __slots__ = ("_weights",)

    def __init__(self, weights: dict[tuple[int, ...], Fraction] | None):
        self._weights = weights

    @classmethod
    def uniform(cls) -> "DecisionDistribution":
        return cls(None)

    @classmethod
    def explicit(
        cls, weights: Mapping[Decision | Sequence[int], int | float | Fraction]
    ) -> "DecisionDistribution":
        if not weights:
            raise EmptySupport("explicit distribution needs at least one decision")
        table: dict[tuple[int, ...], Fraction] = {}
        for decision, w in weights.items():
            frac = Fraction(w)
            if frac < 0:
                raise DomainError(f"negative weight {w} for {decision}")
            table[_as_alloc(decision)] = table.get(_as_alloc(decision), Fraction(0)) + frac
        total = sum(table.values())
        if abs(total - 1) > Fraction(1, 10**12):
            raise DomainError(f"weights sum to {float(total)}, expected 1")
        return cls(table)

    @property
    def is_uniform(self) -> bool:
        return self._weights is None

    def items(self) -> Iterable[tuple[tuple[int, ...], Fraction]]:
        if self._weights is None:
            raise EmptySupport("uniform distribution has no explicit support")
        return self._weights.items()


def max_payoff(opponent: Decision | Sequence[int], n_player: int, delta_p: int) -> int:
    """Best payoff any own decision can score against a known opponent.

    Greedy: visit battlefields by ascending opponent allocation; winning
    battlefield i needs allocation opponent_i + 1 - delta, so take wins
    while the budget lasts. Once one battlefield is unaffordable, all
    remaining (costlier) ones are too.
    """
    phi = _as_alloc(opponent)
    if n_player < 0:
        raise DomainError(f"budget must be non-negative, got {n_player}")
    if delta_p not in (0, 1):
        raise DomainError(f"draw bias must be 0 or 1, got {delta_p}")
    budget = n_player
    wins = 0
    for value in sorted(phi):
        cost = value + 1 - delta_p
        if budget < cost:
            break
        wins += 1
        budget -= cost
    return wins


def max_payoff_bruteforce(
    opponent: Decision | Sequence[int], n_player: int, delta_p: int
) -> int:
    """Exhaustive Max Payoff: literal maximum over every own decision.

    Independent of the greedy implementation; used as its oracle.
    """
    phi = np.asarray(_as_alloc(opponent), dtype=np.int64)
    if delta_p not in (0, 1):
        raise DomainError(f"draw bias must be 0 or 1, got {delta_p}")
    candidates = decision_array(build_graph(len(phi), n_player))
    totals = (candidates + delta_p > phi).sum(axis=1)
    return int(totals.max())


@lru_cache(maxsize=None)
def _uniform_tail_counts(k: int, n: int) -> tuple[int, ...]:
    """tails[c] = number of decisions in the full space with a given
    battlefield's allocation >= c, for c in 0..n+1 (identical across
    battlefields by symmetry)."""
    marginal = allocation_marginal_counts(build_graph(k, n))[0]
    tails = [0] * (n + 2)
    running = 0
    for w in range(n, -1, -1):
        running += marginal[w]
        tails[w] = running
    return tuple(tails)


def expected_payoff(
    opponent: Decision | Sequence[int],
    n_player: int,
    delta_p: int,
    dist: DecisionDistribution | None = None,
) -> Fraction:
    """Mean payoff of a random own decision against a known opponent.

    Uniform weights decompose per battlefield: the expectation is the
    sum over battlefields of the probability that a uniform decision
    allocates enough to win there, read off exact marginal counts.
    """
    phi = _as_alloc(opponent)
    if delta_p not in (0, 1):
        raise DomainError(f"draw bias must be 0 or 1, got {delta_p}")
    if dist is None or dist.is_uniform:
        if n_player < 0:
            raise DomainError(f"budget must be non-negative, got {n_player}")
        k = len(phi)
        total = count_decisions(build_graph(k, n_player))
        tails = _uniform_tail_counts(k, n_player)
        numerator = sum(tails[min(value + 1 - delta_p, n_player + 1)] for value in phi)
        return Fraction(numerator, total)
    acc = Fraction(0)
    for alloc, weight in dist.items():
        if len(alloc) != len(phi):
            raise DimensionMismatch(
                f"supported decision covers {len(alloc)} battlefields, opponent {len(phi)}"
            )
        acc += weight * payoff_vector(alloc, phi, delta_p).total
    return acc


class FeasibleSet:
    """Opponent decisions consistent with one round's feedback.

    Backed either by a pruned decision graph (semi-bandit) or by an
    explicit decision array (bandit). Exposes exact counts, marginals,
    and per-member Max Payoff statistics without forcing callers to
    materialize Decision objects.
    """

    __slots__ = ("origin", "k", "opp_resources", "graph", "bounds", "_explicit", "_cache")

    def __init__(
        self,
        origin: str,
        k: int,
        opp_resources: int,
        graph: DecisionGraph | None = None,
        bounds: AllocationBounds | None = None,
        explicit: np.ndarray | None = None,
    ):
        if (graph is None) == (explicit is None):
            raise DomainError("feasible set needs exactly one backing representation")
        self.origin = origin
        self.k = k
        self.opp_resources = opp_resources
        self.graph = graph
        self.bounds = bounds
        self._explicit = explicit
        self._cache: dict = {}

    @property
    def size(self) -> int:
        if self.graph is not None:
            return count_decisions(self.graph)
        return int(self._explicit.shape[0])

    def array(self) -> np.ndarray:
        if self.graph is not None:
            return decision_array(self.graph)
        return self._explicit

    def decisions(self) -> tuple[Decision, ...]:
        cached = self._cache.get("decisions")
        if cached is None:
            if self.graph is not None:
                cached = tuple(enumerate_decisions(self.graph))
            else:
                cached = tuple(
                    Decision(tuple(int(x) for x in row), self.opp_resources)
                    for row in self._explicit
                )
            self._cache["decisions"] = cached
        return cached

    def contains(self, decision: Decision | Sequence[int]) -> bool:
        alloc = _as_alloc(decision)
        if len(alloc) != self.k:
            raise DimensionMismatch(
                f"decision covers {len(alloc)} battlefields, feasible set covers {self.k}"
            )
        if sum(alloc) != self.opp_resources:
            return False
        if self.graph is not None:
            return self.bounds is None or self.bounds.admits(alloc)
        return bool((self._explicit == np.asarray(alloc)).all(axis=1).any())

    def marginal_counts(self) -> list[list[int]]:
        """counts[i][w] = members allocating w to battlefield i."""
        cached = self._cache.get("marginals")
        if cached is None:
            if self.graph is not None:
                cached = allocation_marginal_counts(self.graph)
            else:
                cached = [
                    np.bincount(self._explicit[:, i], minlength=self.opp_resources + 1)
                    .astype(object)
                    .tolist()
                    for i in range(self.k)
                ]
            self._cache["marginals"] = cached
        return cached

    def max_stats(self, n_player: int, delta_p: int) -> tuple[int, int]:
        """(sum, min) of Max Payoff over all members, computed vectorized."""
        key = (n_player, delta_p)
        cached = self._cache.get(key)
        if cached is None:
            costs = self.array() + (1 - delta_p)
            costs = np.sort(costs, axis=1)
            wins = (np.cumsum(costs, axis=1) <= n_player).sum(axis=1)
            cached = (int(wins.sum()), int(wins.min()))
            self._cache[key] = cached
        return cached


def _semibandit_feasible(
    bounds: AllocationBounds, opp_resources: int, context: str
) -> FeasibleSet:
    base = build_graph(bounds.k, opp_resources)
    pruned = prune_dead_ends(prune_by_bounds(base, bounds))
    fs = FeasibleSet(
        SEMI_BANDIT, bounds.k, opp_resources, graph=pruned, bounds=bounds
    )
    if fs.size == 0:
        raise InfeasibleFeedback(
            f"no opponent decision satisfies the bounds {bounds} ({context}); "
            "genuine feedback always admits the true decision"
        )
    return fs


def feasible_set(
    pi: Decision,
    feedback: Feedback,
    delta_p: int,
    opp_resources: int,
    bound_flags: BoundFlags = BoundFlags(),
) -> FeasibleSet:
    """All opponent decisions consistent with one round's feedback.

    Semi-bandit: classify outcomes, derive per-battlefield bounds, prune
    the opponent's decision graph by them, drop dead ends. Bandit:
    exhaustive filter on the total. Either way the true opponent
    decision is always a member; an empty result raises.
    """
    if feedback.mode == SEMI_BANDIT:
        if feedback.payoff is None:
            raise UnsupportedFeedback("semi-bandit feedback lost its payoff vector")
        if len(feedback.payoff.per_battlefield) != pi.k:
            raise DimensionMismatch(
                f"feedback covers {len(feedback.payoff.per_battlefield)} battlefields, "
                f"decision covers {pi.k}"
            )
        outcome = classify_outcomes(feedback)
        bounds = combined_bounds(pi, outcome, delta_p, opp_resources, bound_flags)
        return _semibandit_feasible(
            bounds, opp_resources, f"pi={pi.allocations}, delta={delta_p}"
        )
    if feedback.mode == BANDIT:
        members = bandit_feasible_filter(pi, feedback.total, delta_p, opp_resources)
        if not members:
            raise InfeasibleFeedback(
                f"no opponent decision yields total {feedback.total} against "
                f"pi={pi.allocations}; genuine feedback always admits the true decision"
            )
        arr = np.asarray([m.allocations for m in members], dtype=np.int64)
        return FeasibleSet(BANDIT, pi.k, opp_resources, explicit=arr)
    raise UnsupportedFeedback(f"unknown feedback mode {feedback.mode!r}")


def observable_max_payoff(
    fs: FeasibleSet,
    n_player: int,
    delta_p: int,
    dist: DecisionDistribution | None = None,
) -> Fraction:
    """Mean Max Payoff over the feasible set (uniform weights by default)."""
    if fs.size == 0:
        raise EmptySupport("feasible set is empty")
    if dist is None or dist.is_uniform:
        total, _ = fs.max_stats(n_player, delta_p)
        return Fraction(total, fs.size)
    acc = Fraction(0)
    for alloc, weight in dist.items():
        acc += weight * max_payoff(alloc, n_player, delta_p)
    return acc


def supremum_payoff(fs: FeasibleSet, n_player: int, delta_p: int) -> int:
    """Worst-case Max Payoff over the feasible set.

    The true opponent decision is a member, so this never exceeds the
    true Max Payoff: it is the payoff the player can prove was reachable.
    """
    if fs.size == 0:
        raise EmptySupport("feasible set is empty")
    _, minimum = fs.max_stats(n_player, delta_p)
    return minimum


def observable_expected_payoff(
    fs: FeasibleSet,
    n_player: int,
    delta_p: int,
    dist_opponent: DecisionDistribution | None = None,
    dist_self: DecisionDistribution | None = None,
) -> Fraction:
    """Mean Expected Payoff over the feasible set.

    With uniform weights on both sides this reduces to exact marginal
    arithmetic: sum over battlefields and feasible allocation levels of
    (member count at that level) x (probability a uniform own decision
    beats it), so neither decision space is enumerated.
    """
    if fs.size == 0:
        raise EmptySupport("feasible set is empty")
    uniform_opp = dist_opponent is None or dist_opponent.is_uniform
    uniform_self = dist_self is None or dist_self.is_uniform
    if uniform_opp and uniform_self:
        total_own = count_decisions(build_graph(fs.k, n_player))
        tails = _uniform_tail_counts(fs.k, n_player)
        numerator = 0
        for row in fs.marginal_counts():
            for w, members in enumerate(row):
                if members:
                    numerator += members * tails[min(w + 1 - delta_p, n_player + 1)]
        return Fraction(numerator, fs.size * total_own)
    if uniform_opp:
        acc = Fraction(0)
        for member in fs.decisions():
            acc += expected_payoff(member, n_player, delta_p, dist_self)
        return acc / fs.size
    acc = Fraction(0)
    for alloc, weight in dist_opponent.items():
        acc += weight * expected_payoff(alloc, n_player, delta_p, dist_self)
    return acc
