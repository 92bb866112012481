import itertools
import math
from fractions import Fraction

import networkx as nx
import numpy as np
import pytest

from bunkbed.analysis import counterexample_gap
from bunkbed.graphs import BunkbedInstance, Edge, WeightedGraph, build_hollom, substitute_gadgets
from bunkbed.montecarlo import (
    MIN_BATCH,
    McEstimate,
    StopDecision,
    _resolve_tie,
    mc_early_stop_policy,
    mc_gap_alternative,
    mc_gap_standard,
)

F = Fraction
HALF = F(1, 2)
K2 = WeightedGraph.uniform(2, [(0, 1)])
K4 = WeightedGraph.uniform(4, list(itertools.combinations(range(4), 2)))


def binomial_se(p, n):
    return math.sqrt(p * (1 - p) / n)


def alternative_oracle(b):
    """Exact alternative-model probabilities by enumerating every coin vector."""
    n = b.base.vertex_count
    same = cross = F(0)
    m = b.base.edge_count
    for coins in itertools.product((0, 1), repeat=m):
        g = nx.Graph()
        g.add_nodes_from(range(2 * n))
        g.add_edges_from((w, w + n) for w in b.transversal)
        for c, e in zip(coins, b.base.edges):
            g.add_edge(e.u + c * n, e.v + c * n)
        same += nx.has_path(g, b.pole_u, b.pole_v)
        cross += nx.has_path(g, b.pole_u, b.pole_v + n)
    return same / 2 ** m, cross / 2 ** m


def test_k2_without_posts():
    e = mc_gap_standard(BunkbedInstance(K2, frozenset(), 0, 1), 100_000, 12345)
    assert e.p_cross_hat == 0
    assert abs(e.p_same_hat - 0.5) < 5 * binomial_se(0.5, e.samples)
    assert e.samples == 100_000 and not e.early_stopped


def test_k4_gap_within_five_standard_errors():
    e = mc_gap_standard(BunkbedInstance(K4, frozenset({0}), 1, 2), 100_000, 99)
    assert abs(e.gap_hat - 3 / 16) < 5 * e.std_error


def test_fixed_seed_is_reproducible():
    b = BunkbedInstance(K4, frozenset({0}), 1, 2)
    assert mc_gap_standard(b, 30_000, 7) == mc_gap_standard(b, 30_000, 7)
    assert mc_gap_standard(b, 30_000, 7) != mc_gap_standard(b, 30_000, 8)
    assert mc_gap_alternative(b, 30_000, 7) == mc_gap_alternative(b, 30_000, 7)


def test_estimate_records_rng_and_seed():
    e = mc_gap_standard(BunkbedInstance(K2, frozenset(), 0, 1), 10, 3)
    assert e.rng.startswith("numpy.PCG64") and e.seed == 3
    assert set(e.to_json()) == {"p_same_hat", "p_cross_hat", "gap_hat", "std_error", "samples", "seed",
                                "early_stopped", "rng"}


def test_std_error_is_paired_difference_formula():
    counts = [50, 30, 5, 15]  # neither, same only, cross only, both
    e = McEstimate.from_counts(counts, 0)
    d = np.array([0] * 50 + [1] * 30 + [-1] * 5 + [0] * 15)
    assert e.gap_hat == pytest.approx(d.mean())
    assert e.std_error == pytest.approx(math.sqrt(d.var(ddof=1) / len(d)))
    assert e.p_same_hat == pytest.approx(0.45) and e.p_cross_hat == pytest.approx(0.2)
    with pytest.raises(ValueError):
        McEstimate.from_counts([0, 0, 0, 0], 0)


def test_rejects_empty_runs_and_bad_seeds():
    with pytest.raises(ValueError):
        mc_gap_standard(BunkbedInstance(K2, frozenset(), 0, 1), 0, 1)
    with pytest.raises(ValueError):
        mc_gap_standard(BunkbedInstance(K2, frozenset(), 0, 1), 10, -1)


def test_alternative_model_on_k2():
    e = mc_gap_alternative(BunkbedInstance(K2, frozenset({0}), 0, 1), 100_000, 5)
    se = binomial_se(0.5, e.samples)
    assert abs(e.p_same_hat - 0.5) < 5 * se and abs(e.p_cross_hat - 0.5) < 5 * se
    # exactly one copy of the edge is open, so the two events partition every sample
    assert e.p_same_hat + e.p_cross_hat == pytest.approx(1.0)


@pytest.mark.parametrize("t,u,v", [(frozenset({0}), 1, 2), (frozenset({0, 3}), 1, 2), (frozenset(), 0, 3)])
def test_alternative_model_against_enumeration(t, u, v):
    b = BunkbedInstance(K4, t, u, v)
    same, cross = alternative_oracle(b)
    e = mc_gap_alternative(b, 100_000, 11)
    assert abs(e.gap_hat - float(same - cross)) < 5 * e.std_error + 1e-12
    assert abs(e.p_same_hat - float(same)) < 5 * binomial_se(float(same), e.samples) + 1e-12


def test_counterexample_gap_is_invisible_to_sampling():
    b = substitute_gadgets(build_hollom(), 3, HALF)
    exact = float(counterexample_gap(3, HALF).gap.exact)
    e = mc_gap_standard(b, 1_000_000, 2024)
    lo, hi = e.confidence_interval()
    assert lo <= exact <= hi
    assert abs(exact) < e.std_error / 100


def test_non_dyadic_probabilities_are_unbiased():
    g = WeightedGraph(2, (Edge(0, 1, F(1, 3)),))
    e = mc_gap_standard(BunkbedInstance(g, frozenset(), 0, 1), 200_000, 8)
    assert abs(e.p_same_hat - 1 / 3) < 5 * binomial_se(1 / 3, e.samples)


class ScriptedStream:
    def __init__(self, values):
        self.values = list(values)

    def random_raw(self):
        return self.values.pop(0)


def test_tie_resolution_uses_exact_comparison():
    # U < 1/2 iff the first 64-bit draw is below 2^63
    assert _resolve_tie(HALF, ScriptedStream([2 ** 63 - 1]))
    assert not _resolve_tie(HALF, ScriptedStream([2 ** 63]))
    # a draw equal to floor(q * 2^64) for non-dyadic q needs another draw
    third = F(1, 3)
    th = (2 ** 64) // 3
    assert _resolve_tie(third, ScriptedStream([th, 0]))
    assert not _resolve_tie(third, ScriptedStream([th, 2 ** 64 - 1]))


def test_early_stop_policy_examples():
    def est(gap, se, n=10_000):
        return McEstimate(0.5, 0.5 - gap, gap, se, n, 0)

    assert mc_early_stop_policy(est(0.2, 0.01), 5) is StopDecision.STOP
    assert mc_early_stop_policy(est(0.001, 0.01), 5) is StopDecision.CONTINUE
    assert mc_early_stop_policy(est(0.3, 0.0, n=MIN_BATCH - 1), 5) is StopDecision.CONTINUE


def test_early_stop_in_sampler():
    e = mc_gap_standard(BunkbedInstance(K2, frozenset(), 0, 1), 1_000_000, 1, early_stop=5, batch=1000)
    assert e.early_stopped and e.samples == 1000
    e = mc_gap_standard(BunkbedInstance(K2, frozenset({0}), 0, 1), 5000, 1, early_stop=5, batch=1000)
    assert not e.early_stopped and e.samples == 5000


def test_batching_does_not_change_sequential_output():
    b = BunkbedInstance(K4, frozenset({0}), 1, 2)
    assert mc_gap_standard(b, 20_000, 4, batch=1000) == mc_gap_standard(b, 20_000, 4, batch=1 << 14)


def test_estimator_is_unbiased_over_seeds():
    b = BunkbedInstance(K4, frozenset({0}), 1, 2)
    runs = [mc_gap_standard(b, 10_000, seed) for seed in range(200)]
    mean = sum(r.gap_hat for r in runs) / len(runs)
    pooled = math.sqrt(sum(r.std_error ** 2 for r in runs)) / len(runs)
    assert abs(mean - 3 / 16) < 4 * pooled
