"""Layered DAG representation of a player's decision space.

A decision for K battlefields and budget N is a length-K vector of
non-negative integers summing to N. Those vectors are in one-to-one
correspondence with source-to-sink paths in a layered graph: vertex
(i, n) means "n units spent after battlefield i", the source is (0, 0),
the sink is (K, N), and an edge (i-1, n') -> (i, n) with n' <= n carries
weight n - n', the allocation to battlefield i.

The graph is stored densely as a (K+1) x (N+1) presence grid plus a
per-layer window [lo_i, hi_i] of admissible edge weights. The base graph
keeps every vertex and the full window [0, N]; pruning returns derived
graphs (new masks/windows) and never mutates an existing one, so base
graphs can be cached and shared. Path counts use Python integers and
stay exact at any scale.
"""

from __future__ import annotations

import random
from functools import lru_cache
from itertools import accumulate
from typing import Iterator, Sequence

import numpy as np

from .core import Decision
from .errors import DimensionMismatch, DomainError, EmptySupport

__all__ = [
    "DecisionGraph",
    "build_graph",
    "path_count_table",
    "source_count_table",
    "count_decisions",
    "enumerate_decisions",
    "decision_array",
    "sample_uniform_decision",
    "prune_by_bounds",
    "prune_dead_ends",
    "prune_unreachable",
    "allocation_marginal_counts",
    "edge_list_lines",
]


class DecisionGraph:
    """Immutable layered decision graph, possibly pruned.

    Construct via build_graph / the prune functions, not directly.
    """

    __slots__ = ("k", "n", "_present", "_lo", "_hi", "_cache")

    def __init__(self, k: int, n: int, present: np.ndarray, lo: tuple[int, ...], hi: tuple[int, ...]):
        self.k = k
        self.n = n
        present.flags.writeable = False
        self._present = present
        self._lo = lo
        self._hi = hi
        self._cache: dict = {}

    # -- structure queries ------------------------------------------------

    def has_vertex(self, i: int, n: int) -> bool:
        return 0 <= i <= self.k and 0 <= n <= self.n and bool(self._present[i, n])

    def weight_window(self, i: int) -> tuple[int, int]:
        """Admissible edge weights into layer i (1-based layer)."""
        return self._lo[i], self._hi[i]

    def successor_levels(self, i: int, n0: int) -> Iterator[int]:
        """Cumulative levels n with an edge (i, n0) -> (i+1, n), ascending."""
        lo, hi = self._lo[i + 1], self._hi[i + 1]
        a = n0 + lo
        b = min(self.n, n0 + hi)
        if a > b:
            return iter(())
        row = self._present[i + 1]
        return (int(x) + a for x in np.nonzero(row[a : b + 1])[0])

    def has_edge(self, i: int, n_from: int, n_to: int) -> bool:
        """Edge from (i-1, n_from) into (i, n_to)?"""
        if not (self.has_vertex(i - 1, n_from) and self.has_vertex(i, n_to)):
            return False
        w = n_to - n_from
        return self._lo[i] <= w <= self._hi[i]

    def vertices(self) -> Iterator[tuple[int, int]]:
        for i in range(self.k + 1):
            for n in np.nonzero(self._present[i])[0]:
                yield i, int(n)

    def edges(self) -> Iterator[tuple[int, int, int]]:
        """(layer, n_from, n_to) triples, ordered by layer, then source, then target."""
        for i in range(1, self.k + 1):
            for n0 in np.nonzero(self._present[i - 1])[0]:
                for n1 in self.successor_levels(i - 1, int(n0)):
                    yield i, int(n0), n1

    # -- cached count tables ----------------------------------------------

    def _to_sink(self) -> list[list[int]]:
        """counts[i][n] = number of paths from (i, n) to the sink (0 if absent)."""
        cached = self._cache.get("to_sink")
        if cached is not None:
            return cached
        k, n = self.k, self.n
        counts: list[list[int]] = [[0] * (n + 1) for _ in range(k + 1)]
        if self._present[k, n]:
            counts[k][n] = 1
        for i in range(k - 1, -1, -1):
            nxt = counts[i + 1]
            prefix = [0, *accumulate(nxt)]
            lo, hi = self._lo[i + 1], self._hi[i + 1]
            row = counts[i]
            for n0 in np.nonzero(self._present[i])[0]:
                a = n0 + lo
                b = min(n, n0 + hi)
                if a <= b:
                    row[n0] = prefix[b + 1] - prefix[a]
        self._cache["to_sink"] = counts
        return counts

    def _from_source(self) -> list[list[int]]:
        """counts[i][n] = number of paths from the source to (i, n)."""
        cached = self._cache.get("from_source")
        if cached is not None:
            return cached
        k, n = self.k, self.n
        counts: list[list[int]] = [[0] * (n + 1) for _ in range(k + 1)]
        if self._present[0, 0]:
            counts[0][0] = 1
        for i in range(1, k + 1):
            prev = counts[i - 1]
            prefix = [0, *accumulate(prev)]
            lo, hi = self._lo[i], self._hi[i]
            row = counts[i]
            for n1 in np.nonzero(self._present[i])[0]:
                a = max(0, n1 - hi)
                b = n1 - lo
                if b >= 0 and a <= b:
                    row[n1] = prefix[b + 1] - prefix[a]
        self._cache["from_source"] = counts
        return counts

    def count(self) -> int:
        return self._to_sink()[0][0]

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return f"DecisionGraph(k={self.k}, n={self.n}, paths={self.count()})"


def build_graph(k: int, n: int) -> DecisionGraph:
    """Full decision graph for k battlefields and budget n (cached, shared)."""
    if k < 1:
        raise DomainError(f"need at least one battlefield, got k={k}")
    if n < 0:
        raise DomainError(f"budget must be non-negative, got n={n}")
    return _build_graph_cached(k, n)


@lru_cache(maxsize=None)
def _build_graph_cached(k: int, n: int) -> DecisionGraph:
    present = np.zeros((k + 1, n + 1), dtype=bool)
    present[0, 0] = True
    present[1:k, :] = True
    present[k, n] = True
    windows_lo = tuple([0] * (k + 1))
    windows_hi = tuple([n] * (k + 1))
    return DecisionGraph(k, n, present, windows_lo, windows_hi)


def path_count_table(graph: DecisionGraph) -> tuple[tuple[int, ...], ...]:
    """Per-vertex path counts to the sink, as an immutable (K+1) x (N+1) table.

    Entries for absent vertices are 0; the sink itself counts 1.
    """
    return tuple(tuple(row) for row in graph._to_sink())


def source_count_table(graph: DecisionGraph) -> tuple[tuple[int, ...], ...]:
    """Per-vertex path counts from the source, same layout as path_count_table."""
    return tuple(tuple(row) for row in graph._from_source())


def count_decisions(graph: DecisionGraph) -> int:
    """Number of source-to-sink paths, i.e. decisions the graph still encodes."""
    return graph.count()


def enumerate_decisions(graph: DecisionGraph) -> list[Decision]:
    """All surviving decisions, DFS order with ascending allocation per layer."""
    out: list[Decision] = []
    k, total = graph.k, graph.n
    if not graph.has_vertex(0, 0):
        return out
    buf: list[int] = []

    def descend(i: int, n0: int) -> None:
        if i == k:
            out.append(Decision(tuple(buf), total))
            return
        for n1 in graph.successor_levels(i, n0):
            buf.append(n1 - n0)
            descend(i + 1, n1)
            buf.pop()

    descend(0, 0)
    return out


def decision_array(graph: DecisionGraph) -> np.ndarray:
    """Surviving decisions as an (M, K) int array (row order unspecified).

    Vectorized layer-by-layer expansion; equivalent to enumerate_decisions
    as a set but much faster for large feasible sets.
    """
    cached = graph._cache.get("decision_array")
    if cached is not None:
        return cached
    k, n = graph.k, graph.n
    empty = np.zeros((0, k), dtype=np.int64)
    if graph.count() == 0:
        graph._cache["decision_array"] = empty
        return empty
    parts = np.zeros((1, 0), dtype=np.int64)
    levels = np.zeros(1, dtype=np.int64)
    for i in range(1, k + 1):
        lo, hi = graph.weight_window(i)
        row = graph._present[i]
        pieces: list[np.ndarray] = []
        new_levels: list[np.ndarray] = []
        for n0 in np.unique(levels):
            a = n0 + lo
            b = min(n, n0 + hi)
            if a > b:
                continue
            targets = np.nonzero(row[a : b + 1])[0] + a
            if targets.size == 0:
                continue
            rows = parts[levels == n0]
            rep = np.repeat(rows, targets.size, axis=0)
            weights = np.tile(targets - n0, rows.shape[0])
            pieces.append(np.column_stack([rep, weights]))
            new_levels.append(np.tile(targets, rows.shape[0]))
        if not pieces:
            graph._cache["decision_array"] = empty
            return empty
        parts = np.vstack(pieces)
        levels = np.concatenate(new_levels)
    parts.flags.writeable = False
    graph._cache["decision_array"] = parts
    return parts


def sample_uniform_decision(graph: DecisionGraph, rng: random.Random) -> Decision:
    """Draw one decision uniformly over the graph's surviving paths.

    Walks from the source choosing each out-edge with probability
    proportional to the successor's path count, which makes every
    complete path equally likely. Exact for any path count (integer
    arithmetic throughout).
    """
    counts = graph._to_sink()
    total = counts[0][0]
    if total == 0 or not graph.has_vertex(0, 0):
        raise EmptySupport("graph has no source-to-sink path to sample")
    weights: list[int] = []
    n0 = 0
    for i in range(graph.k):
        r = rng.randrange(counts[i][n0])
        for n1 in graph.successor_levels(i, n0):
            c = counts[i + 1][n1]
            if r < c:
                weights.append(n1 - n0)
                n0 = n1
                break
            r -= c
        else:  # pragma: no cover - unreachable if counts are consistent
            raise EmptySupport("path-count table inconsistent during sampling")
    return Decision(tuple(weights), graph.n)


def _bounds_pair(bounds) -> tuple[Sequence[int], Sequence[int]]:
    lower = getattr(bounds, "lower", None)
    upper = getattr(bounds, "upper", None)
    if lower is None or upper is None:
        lower, upper = bounds
    return lower, upper


def prune_by_bounds(graph: DecisionGraph, bounds) -> DecisionGraph:
    """Drop edges whose weight falls outside per-battlefield bounds.

    ``bounds`` is an AllocationBounds or a (lower, upper) pair of
    length-K sequences; the edge into layer i survives iff
    lower_i <= weight <= upper_i. Vertices are untouched, so dead ends
    may remain (see prune_dead_ends).
    """
    lower, upper = _bounds_pair(bounds)
    if len(lower) != graph.k or len(upper) != graph.k:
        raise DimensionMismatch(
            f"bounds cover {len(lower)}/{len(upper)} battlefields, graph has {graph.k}"
        )
    lo = list(graph._lo)
    hi = list(graph._hi)
    for i in range(1, graph.k + 1):
        lo[i] = max(lo[i], int(lower[i - 1]))
        hi[i] = min(hi[i], int(upper[i - 1]))
    return DecisionGraph(graph.k, graph.n, graph._present, tuple(lo), tuple(hi))


def prune_dead_ends(graph: DecisionGraph) -> DecisionGraph:
    """Remove every vertex (except the sink) that cannot reach the sink.

    One sweep from layer K-1 down to 0 suffices because edges only go
    forward one layer. Idempotent; may leave a graph with no paths at
    all (the source itself can fall away).
    """
    k, n = graph.k, graph.n
    present = graph._present.copy()
    for i in range(k - 1, -1, -1):
        lo, hi = graph._lo[i + 1], graph._hi[i + 1]
        nxt = np.cumsum(present[i + 1])  # nxt[j] = live vertices at levels 0..j

        def alive(n0: int) -> bool:
            a = n0 + lo
            b = min(n, n0 + hi)
            if a > b:
                return False
            before = nxt[a - 1] if a > 0 else 0
            return bool(nxt[b] - before)

        for n0 in np.nonzero(present[i])[0]:
            if not alive(int(n0)):
                present[i, n0] = False
    return DecisionGraph(k, n, present, graph._lo, graph._hi)


def prune_unreachable(graph: DecisionGraph) -> DecisionGraph:
    """Remove vertices (except the source) with no path from the source.

    Purely cosmetic for enumeration: the surviving path set is unchanged.
    """
    k, n = graph.k, graph.n
    present = graph._present.copy()
    for i in range(1, k + 1):
        lo, hi = graph._lo[i], graph._hi[i]
        prev = np.cumsum(present[i - 1])

        def reachable(n1: int) -> bool:
            a = max(0, n1 - hi)
            b = n1 - lo
            if b < 0 or a > b:
                return False
            before = prev[a - 1] if a > 0 else 0
            return bool(prev[b] - before)

        for n1 in np.nonzero(present[i])[0]:
            if not reachable(int(n1)):
                present[i, n1] = False
    return DecisionGraph(k, n, present, graph._lo, graph._hi)


def allocation_marginal_counts(graph: DecisionGraph) -> list[list[int]]:
    """counts[i][w] = number of surviving decisions allocating w to battlefield i.

    Computed from forward and backward path counts, so no enumeration is
    needed: paths through edge (i, n', n'+w) number F(i-1,n') * B(i,n'+w).
    """
    cached = graph._cache.get("marginals")
    if cached is not None:
        return cached
    k, n = graph.k, graph.n
    fwd = graph._from_source()
    bwd = graph._to_sink()
    out: list[list[int]] = []
    for i in range(1, k + 1):
        lo, hi = graph._lo[i], graph._hi[i]
        prev = fwd[i - 1]
        nxt = bwd[i]
        row = [0] * (n + 1)
        for w in range(max(0, lo), min(n, hi) + 1):
            total = 0
            for n0 in range(0, n - w + 1):
                f = prev[n0]
                if f:
                    b = nxt[n0 + w]
                    if b:
                        total += f * b
            row[w] = total
        out.append(row)
    graph._cache["marginals"] = out
    return out


def edge_list_lines(graph: DecisionGraph) -> list[str]:
    """Text dump of surviving edges, one ``(i,n')->(i+1,n):w`` line each.

    Ordered by source layer, then source level, then target level.
    """
    return [f"({i - 1},{a})->({i},{b}):{b - a}" for i, a, b in graph.edges()]
