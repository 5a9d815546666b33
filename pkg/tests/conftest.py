"""Shared brute-force oracles.

Everything here is computed from first principles with plain Python
loops so test expectations never depend on the code under test.
"""

from __future__ import annotations

import random
from fractions import Fraction

import pytest


def compositions(k: int, n: int) -> list[tuple[int, ...]]:
    """All length-k non-negative integer vectors summing to n."""
    if k == 1:
        return [(n,)]
    out: list[tuple[int, ...]] = []
    for first in range(n + 1):
        out.extend((first, *rest) for rest in compositions(k - 1, n - first))
    return out


def wins_against(mine, theirs, delta: int) -> tuple[int, ...]:
    return tuple(int(a + delta > b) for a, b in zip(mine, theirs))


def brute_max_payoff(opponent, n_player: int, delta: int) -> int:
    k = len(opponent)
    return max(
        sum(wins_against(mine, opponent, delta)) for mine in compositions(k, n_player)
    )


def brute_expected_payoff(opponent, n_player: int, delta: int) -> Fraction:
    k = len(opponent)
    space = compositions(k, n_player)
    total = sum(sum(wins_against(mine, opponent, delta)) for mine in space)
    return Fraction(total, len(space))


def brute_semibandit_set(pi, wins, delta: int, opp_resources: int) -> set[tuple[int, ...]]:
    k = len(pi)
    return {
        phi
        for phi in compositions(k, opp_resources)
        if wins_against(pi, phi, delta) == tuple(wins)
    }


def brute_bandit_set(pi, total: int, delta: int, opp_resources: int) -> set[tuple[int, ...]]:
    k = len(pi)
    return {
        phi
        for phi in compositions(k, opp_resources)
        if sum(wins_against(pi, phi, delta)) == total
    }


def chi_square(counts: dict, expected: float) -> float:
    return sum((c - expected) ** 2 / expected for c in counts.values())


@pytest.fixture
def rng() -> random.Random:
    return random.Random(1234)
