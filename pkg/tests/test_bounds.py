from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from blotto_lab.bounds import (
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
from blotto_lab.core import Decision, Feedback, PayoffVector
from blotto_lab.errors import DimensionMismatch, DomainError, UnsupportedFeedback
from blotto_lab.graph import build_graph, enumerate_decisions, prune_by_bounds, prune_dead_ends

from conftest import (
    brute_bandit_set,
    brute_semibandit_set,
    compositions,
    wins_against,
)

ALL_FLAG_SETS = (
    BoundFlags(),
    BoundFlags(tight_upper=True),
    BoundFlags(general_lower=True),
    BoundFlags(tight_lower=True),
    BoundFlags.all_enhancements(),
)


def outcome_of(wins) -> BattlefieldOutcome:
    return classify_outcomes(PayoffVector.of(wins))


# Instances generated from genuine play, so the feasible set is never
# empty: pick both decisions, derive the win vector from them.
played_instances = st.tuples(
    st.integers(1, 4), st.integers(0, 8), st.integers(1, 8), st.integers(0, 1)
).flatmap(
    lambda t: st.tuples(
        st.just(t),
        st.sampled_from(compositions(t[0], t[1])),
        st.sampled_from(compositions(t[0], t[2])),
    )
)


class TestClassifyOutcomes:
    def test_worked_instance(self):
        out = outcome_of((0, 1, 0))
        assert out.won == {1}
        assert out.lost == {0, 2}
        assert out.k == 3

    def test_all_ones_means_nothing_lost(self):
        assert outcome_of((1, 1, 1)).lost == frozenset()

    def test_all_zeros_means_nothing_won(self):
        assert outcome_of((0, 0)).won == frozenset()

    def test_accepts_semi_bandit_feedback(self):
        fb = Feedback.semi_bandit(PayoffVector.of((1, 0)), 1)
        assert classify_outcomes(fb).won == {0}

    def test_rejects_bandit_feedback(self):
        with pytest.raises(UnsupportedFeedback):
            classify_outcomes(Feedback.bandit(1, 1))

    @given(st.lists(st.integers(0, 1), min_size=1, max_size=6))
    @settings(max_examples=50)
    def test_always_partitions(self, wins):
        out = outcome_of(wins)
        assert out.won | out.lost == frozenset(range(len(wins)))
        assert out.won & out.lost == frozenset()


class TestOutcomeValidation:
    def test_overlap_rejected(self):
        with pytest.raises(DomainError):
            BattlefieldOutcome(frozenset({0}), frozenset({0, 1}))

    def test_gap_rejected(self):
        with pytest.raises(DomainError):
            BattlefieldOutcome(frozenset({0}), frozenset({2}))


class TestAllocationBounds:
    def test_admits(self):
        b = AllocationBounds((1, 0, 2), (2, 2, 3))
        assert b.admits((1, 1, 2))
        assert not b.admits((0, 1, 3))
        assert not b.admits((1, 3, 0))

    def test_admits_checks_length(self):
        with pytest.raises(DimensionMismatch):
            AllocationBounds((0,), (1,)).admits((0, 0))

    def test_mismatched_vectors_rejected(self):
        with pytest.raises(DimensionMismatch):
            AllocationBounds((0, 0), (1,))


class TestTableBounds:
    def test_worked_instance(self):
        # own ⟨1,3,2⟩ against budget 4, only the middle battlefield won
        b = table_bounds(Decision.of((1, 3, 2)), outcome_of((0, 1, 0)), 0, 4)
        assert b.lower == (1, 0, 2)
        assert b.upper == (2, 2, 3)

    def test_all_won_with_zero_allocations_pins_opponent_to_zero(self):
        b = table_bounds(Decision.of((0, 0, 0)), outcome_of((1, 1, 1)), 1, 4)
        assert b.lower == (0, 0, 0)
        assert b.upper == (0, 0, 0)

    def test_upper_clamped_to_opponent_budget(self):
        b = table_bounds(Decision.of((9, 0)), outcome_of((0, 1)), 0, 5)
        assert b.lower == (5, 0)  # 9 clamped down to the budget
        assert b.upper[0] <= 5

    def test_delta_mismatch_rejected(self):
        with pytest.raises(DomainError):
            table_bounds(Decision.of((1, 1)), outcome_of((1, 0)), 2, 4)

    def test_dimension_mismatch_rejected(self):
        with pytest.raises(DimensionMismatch):
            table_bounds(Decision.of((1, 1)), outcome_of((1, 0, 0)), 0, 4)


class TestTightUpperBounds:
    def test_loss_rich_instance_beats_table_on_won_battlefield(self):
        pi = Decision.of((5, 4, 1))
        out = outcome_of((1, 0, 0))
        assert tight_upper_bounds(pi, out, 0, 10).upper[0] == 4  # table stands
        assert tight_upper_bounds(pi, out, 0, 8).upper[0] == 3  # 8 - (4+1)

    def test_equals_table_on_lost_battlefields(self):
        pi = Decision.of((5, 4, 1))
        out = outcome_of((1, 0, 0))
        table = table_bounds(pi, out, 0, 8)
        tight = tight_upper_bounds(pi, out, 0, 8)
        for i in out.lost:
            assert tight.upper[i] == table.upper[i]

    @given(played_instances)
    @settings(max_examples=100, deadline=None)
    def test_never_looser_than_table(self, case):
        (k, n_p, n_opp, delta), pi_alloc, phi = case
        pi = Decision.of(pi_alloc)
        out = outcome_of(wins_against(pi_alloc, phi, delta))
        table = table_bounds(pi, out, delta, n_opp)
        tight = tight_upper_bounds(pi, out, delta, n_opp)
        assert all(t <= b for t, b in zip(tight.upper, table.upper))
        assert tight.lower == table.lower


class TestLowerBoundVariants:
    @given(played_instances)
    @settings(max_examples=100, deadline=None)
    def test_never_weaker_than_table(self, case):
        (k, n_p, n_opp, delta), pi_alloc, phi = case
        pi = Decision.of(pi_alloc)
        out = outcome_of(wins_against(pi_alloc, phi, delta))
        table = table_bounds(pi, out, delta, n_opp)
        for fn in (general_lower_bounds, tight_lower_bounds):
            variant = fn(pi, out, delta, n_opp)
            assert all(v >= b for v, b in zip(variant.lower, table.lower))
            assert variant.upper == table.upper

    def test_tight_lower_engages_only_with_at_most_one_loss(self):
        pi = Decision.of((2, 2, 2))
        out = outcome_of((0, 0, 1))  # two losses: the tight variant never applies
        table = table_bounds(pi, out, 0, 12)
        assert tight_lower_bounds(pi, out, 0, 12).lower == table.lower

    def test_tight_lower_single_loss_instance(self):
        # own ⟨2,2⟩, lost battlefield 0 against budget 7: the opponent
        # spent at most 1 on battlefield 1, so at least 6 on battlefield 0
        pi = Decision.of((2, 2))
        out = outcome_of((0, 1))
        b = tight_lower_bounds(pi, out, 0, 7)
        assert b.lower == (6, 0)
        assert table_bounds(pi, out, 0, 7).lower == (2, 0)

    def test_tight_lower_can_pin_the_decision(self):
        # draw-holder won everywhere with ⟨3,1⟩ against an equal budget:
        # only ⟨3,1⟩ itself is feasible, and the bound proves it
        pi = Decision.of((3, 1))
        out = outcome_of((1, 1))
        b = tight_lower_bounds(pi, out, 1, 4)
        assert b.lower == (3, 1)
        assert b.upper == (3, 1)


class TestBoundSoundness:
    """Every variant's intervals must contain every truly feasible decision."""

    @given(played_instances)
    @settings(max_examples=120, deadline=None)
    def test_bounds_bracket_the_whole_feasible_set(self, case):
        (k, n_p, n_opp, delta), pi_alloc, phi = case
        pi = Decision.of(pi_alloc)
        wins = wins_against(pi_alloc, phi, delta)
        members = brute_semibandit_set(pi_alloc, wins, delta, n_opp)
        assert phi in members
        out = outcome_of(wins)
        for flags in ALL_FLAG_SETS:
            bounds = combined_bounds(pi, out, delta, n_opp, flags)
            for member in members:
                assert bounds.admits(member), (flags, member, bounds)

    @given(played_instances)
    @settings(max_examples=80, deadline=None)
    def test_clamping_keeps_intervals_in_range(self, case):
        (k, n_p, n_opp, delta), pi_alloc, phi = case
        pi = Decision.of(pi_alloc)
        out = outcome_of(wins_against(pi_alloc, phi, delta))
        bounds = combined_bounds(pi, out, delta, n_opp, BoundFlags.all_enhancements())
        assert all(0 <= lo <= n_opp for lo in bounds.lower)
        assert all(0 <= hi <= n_opp for hi in bounds.upper)


class TestPipelineExactness:
    @given(played_instances)
    @settings(max_examples=100, deadline=None)
    def test_table_prune_pipeline_recovers_brute_set(self, case):
        (k, n_p, n_opp, delta), pi_alloc, phi = case
        pi = Decision.of(pi_alloc)
        wins = wins_against(pi_alloc, phi, delta)
        bounds = table_bounds(pi, outcome_of(wins), delta, n_opp)
        graph = prune_dead_ends(prune_by_bounds(build_graph(k, n_opp), bounds))
        got = {d.allocations for d in enumerate_decisions(graph)}
        assert got == brute_semibandit_set(pi_alloc, wins, delta, n_opp)

    def test_worked_instance_set(self):
        pi = Decision.of((1, 3, 2))
        bounds = table_bounds(pi, outcome_of((0, 1, 0)), 0, 4)
        graph = prune_dead_ends(prune_by_bounds(build_graph(3, 4), bounds))
        got = sorted(d.allocations for d in enumerate_decisions(graph))
        assert got == [(1, 0, 3), (1, 1, 2), (2, 0, 2)]


class TestBanditFilter:
    def test_single_battlefield(self):
        assert [d.allocations for d in bandit_feasible_filter(Decision.of((3,)), 1, 0, 2)] == [(2,)]
        assert bandit_feasible_filter(Decision.of((3,)), 0, 0, 5) == [
            Decision.of((5,))
        ]

    def test_impossible_total_is_empty(self):
        # own (3,) with delta 0 cannot lose to a budget-2 opponent
        assert bandit_feasible_filter(Decision.of((3,)), 0, 0, 2) == []

    @given(played_instances)
    @settings(max_examples=60, deadline=None)
    def test_matches_brute_filter_and_contains_truth(self, case):
        (k, n_p, n_opp, delta), pi_alloc, phi = case
        pi = Decision.of(pi_alloc)
        total = sum(wins_against(pi_alloc, phi, delta))
        got = {d.allocations for d in bandit_feasible_filter(pi, total, delta, n_opp)}
        assert got == brute_bandit_set(pi_alloc, total, delta, n_opp)
        assert phi in got

    def test_total_out_of_range_rejected(self):
        with pytest.raises(DomainError):
            bandit_feasible_filter(Decision.of((1, 1)), 3, 0, 4)


class TestBoundFlags:
    def test_from_names_round_trip(self):
        for names in (["table"], ["tight-upper"], ["tight-upper", "tight-lower"]):
            flags = BoundFlags.from_names(names)
            assert BoundFlags.from_names(flags.to_names()) == flags

    def test_table_is_the_neutral_name(self):
        assert BoundFlags.from_names(["table"]) == BoundFlags()
        assert BoundFlags().to_names() == ["table"]

    def test_all_enhancements(self):
        flags = BoundFlags.all_enhancements()
        assert flags.tight_upper and flags.general_lower and flags.tight_lower

    def test_unknown_name_rejected(self):
        with pytest.raises(DomainError):
            BoundFlags.from_names(["sharp"])

    def test_combined_with_no_flags_is_table(self):
        pi = Decision.of((1, 3, 2))
        out = outcome_of((0, 1, 0))
        assert combined_bounds(pi, out, 0, 4) == table_bounds(pi, out, 0, 4)
