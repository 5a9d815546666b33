from __future__ import annotations

import math
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from blotto_lab.errors import DimensionMismatch, DomainError, EmptySupport
from blotto_lab.graph import (
    allocation_marginal_counts,
    build_graph,
    count_decisions,
    decision_array,
    edge_list_lines,
    enumerate_decisions,
    path_count_table,
    prune_by_bounds,
    prune_dead_ends,
    prune_unreachable,
    sample_uniform_decision,
    source_count_table,
)

from conftest import chi_square, compositions

small_graphs = st.tuples(st.integers(1, 4), st.integers(0, 9))


class TestBuildGraph:
    def test_shape_and_endpoints(self):
        g = build_graph(3, 4)
        assert g.k == 3 and g.n == 4
        assert g.has_vertex(0, 0) and g.has_vertex(3, 4)
        assert not g.has_vertex(0, 1)
        assert not g.has_vertex(3, 3)
        assert g.has_vertex(1, 2) and g.has_vertex(2, 0)

    def test_single_battlefield_is_one_edge(self):
        g = build_graph(1, 7)
        assert list(g.edges()) == [(1, 0, 7)]
        assert [d.allocations for d in enumerate_decisions(g)] == [(7,)]

    def test_invalid_arguments(self):
        with pytest.raises(DomainError):
            build_graph(0, 5)
        with pytest.raises(DomainError):
            build_graph(2, -1)

    def test_instances_are_shared(self):
        assert build_graph(4, 6) is build_graph(4, 6)

    def test_presence_grid_is_frozen(self):
        g = build_graph(2, 3)
        with pytest.raises(ValueError):
            g._present[0, 1] = True

    def test_edge_queries(self):
        g = build_graph(2, 3)
        assert g.has_edge(1, 0, 2)
        assert not g.has_edge(1, 2, 1)  # weights cannot be negative
        assert not g.has_edge(2, 1, 2)  # (2, 2) is not the sink
        assert g.weight_window(1) == (0, 3)


class TestCounting:
    @given(small_graphs)
    @settings(max_examples=40, deadline=None)
    def test_count_is_stars_and_bars(self, kn):
        k, n = kn
        assert count_decisions(build_graph(k, n)) == math.comb(n + k - 1, k - 1)

    def test_known_counts(self):
        assert count_decisions(build_graph(3, 4)) == 15
        assert count_decisions(build_graph(1, 9)) == 1
        assert count_decisions(build_graph(4, 0)) == 1

    def test_count_tables_agree_at_endpoints(self):
        g = build_graph(3, 5)
        to_sink = path_count_table(g)
        from_source = source_count_table(g)
        assert to_sink[0][0] == g.count()
        assert from_source[3][5] == g.count()
        assert to_sink[3][5] == 1
        assert from_source[0][0] == 1

    @given(small_graphs)
    @settings(max_examples=25, deadline=None)
    def test_edge_flow_conservation(self, kn):
        """Paths through layer i, summed over its edges, equal the total."""
        k, n = kn
        g = build_graph(k, n)
        fwd = source_count_table(g)
        bwd = path_count_table(g)
        for layer in range(1, k + 1):
            through = sum(
                fwd[layer - 1][a] * bwd[layer][b]
                for i, a, b in g.edges()
                if i == layer
            )
            assert through == g.count()


class TestEnumeration:
    @given(small_graphs)
    @settings(max_examples=30, deadline=None)
    def test_matches_compositions(self, kn):
        k, n = kn
        g = build_graph(k, n)
        got = [d.allocations for d in enumerate_decisions(g)]
        assert len(got) == count_decisions(g)
        assert sorted(got) == sorted(compositions(k, n))

    @given(small_graphs)
    @settings(max_examples=30, deadline=None)
    def test_decision_array_same_set(self, kn):
        k, n = kn
        arr = decision_array(build_graph(k, n))
        assert arr.shape == (math.comb(n + k - 1, k - 1), k)
        assert sorted(map(tuple, arr.tolist())) == sorted(compositions(k, n))

    def test_decision_array_rows_are_frozen(self):
        arr = decision_array(build_graph(2, 2))
        with pytest.raises(ValueError):
            arr[0, 0] = 9


class TestUniformSampling:
    def test_samples_are_valid_decisions(self, rng):
        g = build_graph(4, 7)
        for _ in range(50):
            d = sample_uniform_decision(g, rng)
            assert d.k == 4 and d.owner_resources == 7

    def test_uniformity_chi_square(self, rng):
        # K=3, N=4: 15 decisions; df=14 critical value 36.123 at alpha=0.001
        g = build_graph(3, 4)
        draws = 6000
        counts: dict[tuple[int, ...], int] = {}
        for _ in range(draws):
            d = sample_uniform_decision(g, rng)
            counts[d.allocations] = counts.get(d.allocations, 0) + 1
        assert len(counts) == 15
        assert chi_square(counts, draws / 15) < 36.123

    def test_empty_graph_raises(self):
        g = prune_dead_ends(prune_by_bounds(build_graph(2, 4), ((3, 3), (4, 4))))
        assert count_decisions(g) == 0
        with pytest.raises(EmptySupport):
            sample_uniform_decision(g, random.Random(0))

    def test_pruned_graph_sampling_stays_in_set(self, rng):
        g = prune_dead_ends(prune_by_bounds(build_graph(3, 6), ((1, 0, 2), (2, 3, 4))))
        members = {d.allocations for d in enumerate_decisions(g)}
        for _ in range(100):
            assert sample_uniform_decision(g, rng).allocations in members


def brute_filter(k, n, lower, upper):
    return sorted(
        c
        for c in compositions(k, n)
        if all(lo <= x <= hi for lo, x, hi in zip(lower, c, upper))
    )


bounds_cases = st.tuples(st.integers(1, 4), st.integers(0, 8)).flatmap(
    lambda kn: st.tuples(
        st.just(kn),
        st.lists(
            st.tuples(st.integers(0, kn[1] + 1), st.integers(0, kn[1] + 1)),
            min_size=kn[0],
            max_size=kn[0],
        ),
    )
)


class TestPruning:
    @given(bounds_cases)
    @settings(max_examples=80, deadline=None)
    def test_bound_pruning_matches_interval_filter(self, case):
        (k, n), pairs = case
        lower = tuple(min(p) for p in pairs)
        upper = tuple(max(p) for p in pairs)
        g = prune_by_bounds(build_graph(k, n), (lower, upper))
        got = sorted(d.allocations for d in enumerate_decisions(g))
        assert got == brute_filter(k, n, lower, upper)

    @given(bounds_cases)
    @settings(max_examples=60, deadline=None)
    def test_dead_end_removal_preserves_paths(self, case):
        (k, n), pairs = case
        lower = tuple(min(p) for p in pairs)
        upper = tuple(max(p) for p in pairs)
        windowed = prune_by_bounds(build_graph(k, n), (lower, upper))
        trimmed = prune_dead_ends(windowed)
        clean = prune_unreachable(trimmed)
        expected = sorted(d.allocations for d in enumerate_decisions(windowed))
        assert sorted(d.allocations for d in enumerate_decisions(trimmed)) == expected
        assert sorted(d.allocations for d in enumerate_decisions(clean)) == expected
        assert trimmed.count() == windowed.count() == clean.count()

    def test_dead_end_removal_drops_stranded_vertices(self):
        windowed = prune_by_bounds(build_graph(2, 4), ((0, 3), (0, 1)))
        trimmed = prune_dead_ends(windowed)
        # (1, 0) only reaches (2, 0) or (2, 1), never the sink (2, 4)
        assert windowed.has_vertex(1, 0)
        assert not trimmed.has_vertex(1, 0)
        assert trimmed.count() == windowed.count()

    def test_pruning_never_mutates_the_base(self):
        base = build_graph(3, 5)
        before = count_decisions(base)
        edges_before = sum(1 for _ in base.edges())
        pruned = prune_dead_ends(prune_by_bounds(base, ((2, 2, 2), (2, 2, 2))))
        assert count_decisions(pruned) == 0
        assert count_decisions(base) == before
        assert sum(1 for _ in base.edges()) == edges_before

    def test_wrong_bound_length(self):
        with pytest.raises(DimensionMismatch):
            prune_by_bounds(build_graph(3, 5), ((0, 0), (5, 5)))

    def test_accepts_bounds_object(self):
        from blotto_lab.bounds import AllocationBounds

        g = prune_by_bounds(build_graph(2, 4), AllocationBounds((1, 0), (2, 4)))
        got = sorted(d.allocations for d in enumerate_decisions(g))
        assert got == [(1, 3), (2, 2)]


class TestMarginals:
    @given(small_graphs)
    @settings(max_examples=25, deadline=None)
    def test_counts_match_enumeration(self, kn):
        k, n = kn
        g = build_graph(k, n)
        marginals = allocation_marginal_counts(g)
        members = [d.allocations for d in enumerate_decisions(g)]
        for i in range(k):
            for w in range(n + 1):
                assert marginals[i][w] == sum(1 for m in members if m[i] == w)

    def test_rows_sum_to_total(self):
        g = prune_dead_ends(prune_by_bounds(build_graph(3, 6), ((1, 0, 2), (2, 3, 4))))
        for row in allocation_marginal_counts(g):
            assert sum(row) == g.count()


class TestEdgeListLines:
    def test_single_path_graph(self):
        assert edge_list_lines(build_graph(1, 2)) == ["(0,0)->(1,2):2"]

    def test_lines_agree_with_edges(self):
        g = build_graph(2, 2)
        assert edge_list_lines(g) == [
            f"({i - 1},{a})->({i},{b}):{b - a}" for i, a, b in g.edges()
        ]


class TestLargeCounts:
    def test_counts_stay_exact_past_float_precision(self):
        # 64 choose 32 has 61 bits; Python ints keep it exact
        g = build_graph(33, 32)
        assert count_decisions(g) == math.comb(64, 32)
