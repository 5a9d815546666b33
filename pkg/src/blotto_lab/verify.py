"""Built-in consistency checks against brute-force oracles.

Everything here recomputes expected answers from first principles
(exhaustive enumeration, direct filtering) and compares them with the
package's graph-based implementations. `blotto-lab verify` runs these
and reports one PASS/FAIL line per check; the module has no dependency
on the development test suite.
"""

from __future__ import annotations

import math
import random

import numpy as np

from .bounds import BoundFlags
from .core import Decision, Feedback, payoff_vector
from .errors import InfeasibleFeedback
from .estimators import (
    feasible_set,
    max_payoff,
    max_payoff_bruteforce,
    supremum_payoff,
)
from .evaluation import MetricSeries, nrmse, rrsd
from .graph import build_graph, count_decisions, sample_uniform_decision

FLAG_VARIANTS = (
    BoundFlags(),
    BoundFlags(tight_upper=True),
    BoundFlags(general_lower=True),
    BoundFlags(tight_lower=True),
    BoundFlags.all_enhancements(),
)


def compositions(k: int, n: int) -> list[tuple[int, ...]]:
    """Every length-k tuple of non-negative ints summing to n."""
    if k == 1:
        return [(n,)]
    out: list[tuple[int, ...]] = []
    for first in range(n + 1):
        out.extend((first, *rest) for rest in compositions(k - 1, n - first))
    return out


def _report(name: str, ok: bool, detail: str = "") -> bool:
    status = "PASS" if ok else "FAIL"
    suffix = f" ({detail})" if detail else ""
    print(f"{status} {name}{suffix}")
    return ok


def check_path_counts() -> bool:
    pinned = {(3, 10): 66, (3, 15): 136, (5, 15): 3876, (5, 20): 10626}
    ok = True
    for (k, n), expected in pinned.items():
        got = count_decisions(build_graph(k, n))
        ok &= got == expected == math.comb(n + k - 1, k - 1)
    for k, n in [(1, 0), (1, 7), (2, 0), (4, 3)]:
        got = count_decisions(build_graph(k, n))
        ok &= got == len(compositions(k, n))
    return _report("path counts match closed form and enumeration", ok)


def check_uniform_sampler(seed: int) -> bool:
    rng = random.Random(seed)
    k, n, draws = 3, 4, 6000
    graph = build_graph(k, n)
    support = compositions(k, n)
    counts = {alloc: 0 for alloc in support}
    for _ in range(draws):
        counts[sample_uniform_decision(graph, rng).allocations] += 1
    expected = draws / len(support)
    chi2 = sum((c - expected) ** 2 / expected for c in counts.values())
    # chi-square df=14, far tail; the seeded stream makes this stable
    ok = chi2 < 36.13 and set(counts) == set(support)
    return _report("uniform decision sampler", ok, f"chi2={chi2:.2f}, df=14")


def check_semibandit_sets(seed: int, instances: int = 200) -> bool:
    rng = random.Random(seed)
    ok = True
    for _ in range(instances):
        k = rng.randint(1, 4)
        n_opp = rng.randint(0, 8)
        n_p = rng.randint(1, 8)
        delta = rng.randint(0, 1)
        phi = Decision(rng.choice(compositions(k, n_opp)), n_opp)
        pi = Decision(rng.choice(compositions(k, n_p)), n_p)
        payoff = payoff_vector(pi, phi, delta)
        flags = rng.choice(FLAG_VARIANTS)
        fs = feasible_set(pi, Feedback.semi_bandit(payoff, 1), delta, n_opp, flags)
        got = {d.allocations for d in fs.decisions()}
        want = {
            x
            for x in compositions(k, n_opp)
            if payoff_vector(pi, x, delta).per_battlefield == payoff.per_battlefield
        }
        ok &= got == want and phi.allocations in got
        if not ok:
            return _report(
                "semi-bandit feasible sets equal brute force",
                False,
                f"pi={pi.allocations} phi={phi.allocations} delta={delta}",
            )
    return _report(
        "semi-bandit feasible sets equal brute force", ok, f"{instances} instances"
    )


def check_bandit_sets(seed: int, instances: int = 100) -> bool:
    rng = random.Random(seed)
    ok = True
    for _ in range(instances):
        k = rng.randint(1, 4)
        n_opp = rng.randint(0, 8)
        n_p = rng.randint(1, 8)
        delta = rng.randint(0, 1)
        phi = Decision(rng.choice(compositions(k, n_opp)), n_opp)
        pi = Decision(rng.choice(compositions(k, n_p)), n_p)
        total = payoff_vector(pi, phi, delta).total
        fs = feasible_set(pi, Feedback.bandit(total, 1), delta, n_opp)
        got = {d.allocations for d in fs.decisions()}
        want = {
            x
            for x in compositions(k, n_opp)
            if payoff_vector(pi, x, delta).total == total
        }
        ok &= got == want and phi.allocations in got
    return _report(
        "bandit feasible sets equal brute force", ok, f"{instances} instances"
    )


def check_greedy_max() -> bool:
    ok = True
    checked = 0
    for k in (1, 2, 3):
        for total in range(0, 7):
            for phi in compositions(k, total):
                for delta in (0, 1):
                    for n_p in range(0, 7):
                        ok &= max_payoff(phi, n_p, delta) == max_payoff_bruteforce(
                            phi, n_p, delta
                        )
                        checked += 1
    return _report("greedy max payoff equals exhaustive max", ok, f"{checked} cases")


def check_bracketing(seed: int, rounds: int = 300) -> bool:
    rng = random.Random(seed)
    k, n_p, n_opp = 4, 10, 10
    own_graph = build_graph(k, n_p)
    opp_graph = build_graph(k, n_opp)
    ok = True
    for _ in range(rounds):
        delta = rng.randint(0, 1)
        pi = sample_uniform_decision(own_graph, rng)
        phi = sample_uniform_decision(opp_graph, rng)
        payoff = payoff_vector(pi, phi, delta)
        truth = max_payoff(phi, n_p, delta)
        for flags in FLAG_VARIANTS:
            try:
                fs = feasible_set(pi, Feedback.semi_bandit(payoff, 1), delta, n_opp, flags)
            except InfeasibleFeedback:
                return _report("bounds always retain the true decision", False)
            ok &= fs.contains(phi)
            ok &= supremum_payoff(fs, n_p, delta) <= truth
    return _report(
        "bounds retain truth; supremum never exceeds max", ok, f"{rounds} rounds x 5 flag sets"
    )


def check_metric_identities() -> bool:
    exact = MetricSeries("observable-max-vs-max", [1.0, 2.0], [1.0, 2.0])
    offset = MetricSeries("observable-max-vs-max", [1.0, 1.0], [2.0, 2.0])
    mixed = MetricSeries("observable-max-vs-max", [0.0, 2.0], [1.0, 1.0])
    ok = nrmse(exact) == 0.0 and rrsd(exact) == 0.0
    ok &= nrmse(offset) == 1.0 and rrsd(offset) == 0.0
    ok &= nrmse(mixed) == 1.0 and rrsd(mixed) == 1.0
    rng = np.random.default_rng(7)
    y = rng.uniform(0.5, 3.0, size=200)
    y_est = y + rng.normal(0.3, 0.4, size=200)
    noisy = MetricSeries("observable-max-vs-max", y, y_est)
    ok &= rrsd(noisy) <= nrmse(noisy) + 1e-12
    return _report("error metric identities", ok)


def run_all(seed: int = 0) -> bool:
    results = [
        check_path_counts(),
        check_uniform_sampler(seed),
        check_semibandit_sets(seed + 1),
        check_bandit_sets(seed + 2),
        check_greedy_max(),
        check_bracketing(seed + 3),
        check_metric_identities(),
    ]
    passed = sum(results)
    print(f"{passed}/{len(results)} checks passed")
    return all(results)
