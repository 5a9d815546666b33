"""Decision-making strategies for driving repeated-game simulations.

Four kinds with deliberately different behaviors: uniform play over the
whole decision space, an exponential-weights learner over graph edges,
a combinatorial UCB learner with a sampled-candidate argmax oracle, and
a static profile player (optionally randomized through discretize).
Learners consume only their own feedback; no strategy ever sees the
opponent's decision.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .core import Decision, Feedback
from .errors import ConfigError, DomainError, UnsupportedFeedback
from .graph import (
    build_graph,
    count_decisions,
    path_count_table,
    sample_uniform_decision,
    source_count_table,
)

__all__ = [
    "discretize",
    "preset_profile",
    "PROFILE_PRESETS",
    "Strategy",
    "UniformRandomStrategy",
    "StaticConcentratedStrategy",
    "Exp3EdgeStrategy",
    "CombinatorialUcbStrategy",
    "StrategySpec",
    "STRATEGY_KINDS",
    "make_strategy",
    "parse_strategy_spec",
]


def discretize(profile: Sequence[float], n: int, rng: random.Random) -> tuple[int, ...]:
    """Round a non-negative continuous allocation to integers summing to n.

    The profile is scaled to sum n and floored; the missing units are
    then assigned by drawing battlefield indices without replacement
    with probability proportional to the fractional remainders. If
    floating error leaves fewer positive remainders than missing units,
    the leftovers go to the largest remaining remainders
    deterministically.
    """
    xs = [float(x) for x in profile]
    if not xs:
        raise DomainError("profile must not be empty")
    if any(not math.isfinite(x) or x < 0 for x in xs):
        raise DomainError(f"profile components must be finite and non-negative: {profile}")
    total = sum(xs)
    if total <= 0:
        raise DomainError("profile needs at least one positive component")
    if n < 0:
        raise DomainError(f"budget must be non-negative, got {n}")
    scaled = [x * n / total for x in xs]
    base = [math.floor(v) for v in scaled]
    shortfall = n - sum(base)
    if shortfall <= 0:
        return tuple(base)
    remainder = [v - b for v, b in zip(scaled, base)]
    pool = [i for i, r in enumerate(remainder) if r > 0]
    picked: set[int] = set()
    for _ in range(shortfall):
        weight_total = math.fsum(remainder[i] for i in pool)
        if pool and weight_total > 0:
            r = rng.random() * weight_total
            choice = pool[-1]
            acc = 0.0
            for i in pool:
                acc += remainder[i]
                if r < acc:
                    choice = i
                    break
            pool.remove(choice)
        else:
            leftovers = [i for i in range(len(xs)) if i not in picked]
            choice = max(leftovers, key=lambda i: (remainder[i], -i))
        picked.add(choice)
        base[choice] += 1
    return tuple(base)


class Strategy:
    """Base interface: choose a decision, then observe own feedback."""

    kind = "abstract"

    def __init__(self, k: int, n: int):
        if k < 1:
            raise DomainError(f"need at least one battlefield, got k={k}")
        if n < 0:
            raise DomainError(f"budget must be non-negative, got n={n}")
        self.k = k
        self.n = n

    def choose(self, t: int, rng: random.Random) -> Decision:
        raise NotImplementedError

    def observe(self, decision: Decision, feedback: Feedback) -> None:
        """Default: stateless strategies ignore feedback."""


class UniformRandomStrategy(Strategy):
    """Plays a uniformly random decision every round."""

    kind = "uniform-random"

    def __init__(self, k: int, n: int):
        super().__init__(k, n)
        self._graph = build_graph(k, n)

    def choose(self, t: int, rng: random.Random) -> Decision:
        return sample_uniform_decision(self._graph, rng)


PROFILE_PRESETS = ("geometric", "even")


def preset_profile(name: str, k: int) -> tuple[float, ...]:
    """Named continuous profiles that adapt to the battlefield count."""
    if name == "geometric":
        return tuple(2.0 ** -i for i in range(k))
    if name == "even":
        return (1.0,) * k
    raise DomainError(f"unknown profile preset {name!r}; choose from {PROFILE_PRESETS}")


class StaticConcentratedStrategy(Strategy):
    """Plays one fixed target every round.

    With no profile, everything goes on a single battlefield. With a
    profile (an explicit weight sequence or a named preset), the
    continuous target is re-discretized each round, so play hovers
    around the profile with the discretizer's sampling law.
    """

    kind = "static-concentrated"

    def __init__(
        self,
        k: int,
        n: int,
        profile: Sequence[float] | str | None = None,
        battlefield: int = 0,
    ):
        super().__init__(k, n)
        if profile is None:
            if not 0 <= battlefield < k:
                raise DomainError(f"battlefield {battlefield} out of range for k={k}")
            allocations = [0] * k
            allocations[battlefield] = n
            self._fixed: Decision | None = Decision(tuple(allocations), n)
            self._profile: tuple[float, ...] | None = None
        else:
            if isinstance(profile, str):
                profile = preset_profile(profile, k)
            if len(profile) != k:
                raise DomainError(f"profile covers {len(profile)} battlefields, expected {k}")
            discretize(profile, n, random.Random(0))  # validate eagerly
            self._fixed = None
            self._profile = tuple(float(x) for x in profile)

    def choose(self, t: int, rng: random.Random) -> Decision:
        if self._fixed is not None:
            return self._fixed
        return Decision(discretize(self._profile, self.n, rng), self.n)


class Exp3EdgeStrategy(Strategy):
    """Exponential-weights learner over decision-graph edges.

    Keeps one weight per graph edge. With probability gamma it explores
    with a uniformly random decision; otherwise it samples a path with
    probability proportional to the product of its edge weights, which
    weight-aware path sums make exact. Semi-bandit feedback updates the
    played edges multiplicatively with importance-weighted payoffs.
    Weights live in log space so extreme importance weights stay finite.
    """

    kind = "exp3-edge"

    def __init__(self, k: int, n: int, gamma: float = 0.25, eta: float = 0.05):
        super().__init__(k, n)
        if not 0 <= gamma <= 1:
            raise DomainError(f"gamma must be in [0, 1], got {gamma}")
        if eta <= 0:
            raise DomainError(f"eta must be positive, got {eta}")
        self.gamma = float(gamma)
        self.eta = float(eta)
        self._graph = build_graph(k, n)
        size = n + 1
        self._logw: list[np.ndarray | None] = [None]
        self._uniform_edge_prob: list[np.ndarray | None] = [None]
        fwd = source_count_table(self._graph)
        bwd = path_count_table(self._graph)
        total = count_decisions(self._graph)
        for layer in range(1, k + 1):
            logw = np.full((size, size), -np.inf)
            uprob = np.zeros((size, size))
            for n0 in range(size):
                if fwd[layer - 1][n0] == 0:
                    continue
                for n1 in self._graph.successor_levels(layer - 1, n0):
                    logw[n0, n1] = 0.0
                    uprob[n0, n1] = fwd[layer - 1][n0] * bwd[layer][n1] / total
            self._logw.append(logw)
            self._uniform_edge_prob.append(uprob)

    def _backward_logs(self) -> list[np.ndarray]:
        """logs[i][n] = log total edge-weight product over paths (i, n) -> sink."""
        logs: list[np.ndarray] = [np.empty(0)] * (self.k + 1)
        tail = np.full(self.n + 1, -np.inf)
        tail[self.n] = 0.0
        logs[self.k] = tail
        for layer in range(self.k, 0, -1):
            tail = np.logaddexp.reduce(self._logw[layer] + tail[None, :], axis=1)
            logs[layer - 1] = tail
        return logs

    def _forward_logs(self) -> list[np.ndarray]:
        logs: list[np.ndarray] = [np.empty(0)] * (self.k + 1)
        head = np.full(self.n + 1, -np.inf)
        head[0] = 0.0
        logs[0] = head
        for layer in range(1, self.k + 1):
            head = np.logaddexp.reduce(head[:, None] + self._logw[layer], axis=0)
            logs[layer] = head
        return logs

    def log_weight_tables(self) -> list[np.ndarray]:
        """Copies of the per-layer edge log-weights (index 0 unused)."""
        return [np.empty(0) if t is None else t.copy() for t in self._logw]

    def weighted_path_probability(self, decision: Decision | Sequence[int]) -> float:
        """Probability the non-exploring branch samples this decision."""
        alloc = tuple(decision)
        logs = self._backward_logs()
        log_prob = -logs[0][0]
        n0 = 0
        for layer, w in enumerate(alloc, start=1):
            log_prob += self._logw[layer][n0, n0 + w]
            n0 += w
        return float(math.exp(log_prob))

    def choose(self, t: int, rng: random.Random) -> Decision:
        if rng.random() < self.gamma:
            return sample_uniform_decision(self._graph, rng)
        logs = self._backward_logs()
        weights: list[int] = []
        n0 = 0
        for layer in range(1, self.k + 1):
            logits = self._logw[layer][n0] + logs[layer]
            peak = logits.max()
            probs = np.exp(logits - peak)
            probs /= probs.sum()
            cumulative = np.cumsum(probs)
            idx = int(np.searchsorted(cumulative, rng.random(), side="right"))
            idx = min(idx, self.n)
            while probs[idx] == 0.0:  # guard against float-edge overshoot
                idx -= 1
            weights.append(idx - n0)
            n0 = idx
        return Decision(tuple(weights), self.n)

    def observe(self, decision: Decision, feedback: Feedback) -> None:
        if feedback.payoff is None:
            raise UnsupportedFeedback("exp3-edge needs per-battlefield feedback")
        gains = feedback.payoff.per_battlefield
        backward = self._backward_logs()
        forward = self._forward_logs()
        log_total = backward[0][0]
        n0 = 0
        for layer, w in enumerate(decision, start=1):
            n1 = n0 + w
            if gains[layer - 1]:
                log_marginal = (
                    forward[layer - 1][n0]
                    + self._logw[layer][n0, n1]
                    + backward[layer][n1]
                    - log_total
                )
                weighted_prob = math.exp(min(log_marginal, 0.0))
                selection_prob = (1 - self.gamma) * weighted_prob + self.gamma * float(
                    self._uniform_edge_prob[layer][n0, n1]
                )
                selection_prob = max(selection_prob, 1e-12)
                self._logw[layer][n0, n1] += self.eta / selection_prob
            n0 = n1
        for layer in range(1, self.k + 1):
            logw = self._logw[layer]
            peak = logw.max()
            if peak > 0:
                logw -= peak  # per-layer rescale; path proportions unchanged


class CombinatorialUcbStrategy(Strategy):
    """UCB over per-(battlefield, allocation-level) payoff statistics.

    The argmax oracle is naive: draw a large uniform sample of candidate
    decisions, score each by the sum of optimistic per-battlefield
    estimates (empirical mean plus a confidence radius, or +inf for
    levels never tried), and play the first-best candidate.
    """

    kind = "ucb-combinatorial"

    def __init__(self, k: int, n: int, samples: int = 1000, confidence: float = 1.5):
        super().__init__(k, n)
        if samples < 1:
            raise DomainError(f"need at least one candidate sample, got {samples}")
        if confidence <= 0:
            raise DomainError(f"confidence scale must be positive, got {confidence}")
        self.samples = int(samples)
        self.confidence = float(confidence)
        self._counts = np.zeros((k, n + 1), dtype=np.int64)
        self._means = np.zeros((k, n + 1))

    def _sample_candidates(self, rng: random.Random) -> np.ndarray:
        k, n = self.k, self.n
        if k == 1:
            return np.full((self.samples, 1), n, dtype=np.int64)
        slots = n + k - 1
        out = np.empty((self.samples, k), dtype=np.int64)
        for row in range(self.samples):
            cuts = sorted(rng.sample(range(slots), k - 1))
            prev = -1
            for j, cut in enumerate(cuts):
                out[row, j] = cut - prev - 1
                prev = cut
            out[row, k - 1] = slots - 1 - prev
        return out

    def choose(self, t: int, rng: random.Random) -> Decision:
        candidates = self._sample_candidates(rng)
        with np.errstate(divide="ignore"):
            radius = np.sqrt(self.confidence * math.log(max(t, 2)) / self._counts)
        optimistic = np.where(self._counts > 0, self._means + radius, np.inf)
        scores = optimistic[np.arange(self.k)[None, :], candidates].sum(axis=1)
        best = int(np.argmax(scores))  # first max wins ties
        return Decision(tuple(int(x) for x in candidates[best]), self.n)

    def observe(self, decision: Decision, feedback: Feedback) -> None:
        if feedback.payoff is None:
            raise UnsupportedFeedback("ucb-combinatorial needs per-battlefield feedback")
        for i, (level, gain) in enumerate(zip(decision, feedback.payoff.per_battlefield)):
            c = self._counts[i, level]
            self._means[i, level] = (self._means[i, level] * c + gain) / (c + 1)
            self._counts[i, level] = c + 1


_STRATEGY_CLASSES: dict[str, type[Strategy]] = {
    cls.kind: cls
    for cls in (
        UniformRandomStrategy,
        StaticConcentratedStrategy,
        Exp3EdgeStrategy,
        CombinatorialUcbStrategy,
    )
}

STRATEGY_KINDS = tuple(sorted(_STRATEGY_CLASSES))


@dataclass(frozen=True, slots=True)
class StrategySpec:
    """Serializable (kind, parameters) description of a strategy."""

    kind: str
    params: tuple[tuple[str, object], ...] = ()

    @classmethod
    def of(cls, kind: str, **params) -> "StrategySpec":
        normalized = tuple(sorted((k, _freeze(v)) for k, v in params.items()))
        return cls(kind, normalized)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "params": {k: _thaw(v) for k, v in self.params}}

    @classmethod
    def from_dict(cls, data: Mapping) -> "StrategySpec":
        return cls.of(str(data["kind"]), **dict(data.get("params", {})))

    def label(self) -> str:
        return self.kind


def _freeze(value):
    if isinstance(value, (list, tuple)):
        return tuple(_freeze(v) for v in value)
    return value


def _thaw(value):
    if isinstance(value, tuple):
        return [_thaw(v) for v in value]
    return value


def make_strategy(spec: StrategySpec, k: int, n: int) -> Strategy:
    cls = _STRATEGY_CLASSES.get(spec.kind)
    if cls is None:
        raise ConfigError(
            f"unknown strategy kind {spec.kind!r}; choose from {list(STRATEGY_KINDS)}"
        )
    try:
        return cls(k, n, **dict(spec.params))
    except TypeError as exc:
        raise ConfigError(f"bad parameters for strategy {spec.kind!r}: {exc}") from exc


def parse_strategy_spec(text: str) -> StrategySpec:
    """Parse ``kind`` or ``kind:key=value,key=value`` (profiles as a/b/c)."""
    kind, _, tail = text.partition(":")
    kind = kind.strip()
    if not kind:
        raise ConfigError(f"empty strategy kind in {text!r}")
    params: dict[str, object] = {}
    if tail:
        for item in tail.split(","):
            key, sep, raw = item.partition("=")
            if not sep:
                raise ConfigError(f"expected key=value in strategy spec, got {item!r}")
            params[key.strip()] = _parse_param_value(raw.strip())
    return StrategySpec.of(kind, **params)


def _parse_param_value(raw: str):
    if "/" in raw:
        return tuple(float(part) for part in raw.split("/"))
    for caster in (int, float):
        try:
            return caster(raw)
        except ValueError:
            continue
    return raw
