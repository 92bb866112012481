import itertools
import random
from fractions import Fraction

import pytest

from bunkbed.analysis import (
    EnumerationCapExceeded,
    Sign,
    batch_scan,
    bbc_gap_exact,
    complete_bbc_gap_exact,
    counterexample_gap,
    gap_polynomial_per_edge,
    gap_polynomial_univariate,
    scan_graph,
)
from bunkbed.formats import FormatError
from bunkbed.graphs import (
    BunkbedInstance,
    Edge,
    Hyperedge,
    Hypergraph3,
    WeightedGraph,
    build_hollom,
    substitute_gadgets,
)
from bunkbed.hyper import wz_bunkbed_probs
from bunkbed.exact import gadget_kernel_closed

from oracles import bunkbed_probabilities, subset_probabilities

F = Fraction
HALF = F(1, 2)
K2 = WeightedGraph.uniform(2, [(0, 1)])
K4 = WeightedGraph.uniform(4, list(itertools.combinations(range(4), 2)))


def random_instance(rng, n=4, m=None, probs=(HALF,)):
    m = m if m is not None else rng.randint(2, 6)
    edges = []
    for _ in range(m):
        u, v = rng.sample(range(n), 2)
        edges.append(Edge(u, v, rng.choice(probs)))
    g = WeightedGraph(n, tuple(edges))
    t = frozenset(w for w in range(n) if rng.random() < 0.4)
    u, v = rng.sample(range(n), 2)
    return BunkbedInstance(g, t, u, v)


def test_k2_examples():
    r = bbc_gap_exact(BunkbedInstance(K2, frozenset({0}), 0, 1))
    assert (r.p_same.exact, r.p_cross.exact, r.gap.exact) == (HALF, HALF, 0)
    assert r.sign is Sign.ZERO and r.method == "brute-force"
    r = bbc_gap_exact(BunkbedInstance(K2, frozenset(), 0, 1))
    assert (r.p_same.exact, r.p_cross.exact, r.gap.exact) == (HALF, 0, HALF)
    assert r.sign is Sign.POSITIVE


@pytest.mark.parametrize("method", ["brute-force", "split"])
def test_bbc_gap_against_networkx_oracle(method):
    rng = random.Random(17)
    for _ in range(20):
        b = random_instance(rng, probs=(F(1, 3), HALF, F(3, 4), F(1)))
        same, cross = bunkbed_probabilities(b.base.vertex_count, list(b.base.edges), b.transversal,
                                            b.pole_u, b.pole_v)
        r = bbc_gap_exact(b, method=method)
        assert (r.p_same.exact, r.p_cross.exact) == (same, cross)


def test_k4_frozen_gap():
    r = bbc_gap_exact(BunkbedInstance(K4, frozenset({0}), 1, 2))
    assert (r.p_same.exact, r.p_cross.exact, r.gap.exact) == (F(3, 4), F(9, 16), F(3, 16))
    assert r.work == 2 ** 12


def test_cap_applies_to_level_edges():
    big = WeightedGraph.uniform(8, list(itertools.combinations(range(8), 2))[:14])
    with pytest.raises(EnumerationCapExceeded):
        bbc_gap_exact(BunkbedInstance(big, frozenset({0}), 1, 2))
    r = bbc_gap_exact(BunkbedInstance(big, frozenset({0}), 1, 2), method="split")
    assert r.sign in (Sign.POSITIVE, Sign.ZERO)


@pytest.mark.parametrize("n", [2, 3])
@pytest.mark.parametrize("p", [F(1, 4), HALF])
def test_reduction_equals_brute_force_on_one_gadget(n, p):
    h = Hypergraph3(3, (Hyperedge(0, 1, 2),), frozenset({0}))
    k = gadget_kernel_closed(n, p)
    for s, t in itertools.permutations(range(3), 2):
        same, cross = wz_bunkbed_probs(h, k, s, t)
        r = bbc_gap_exact(substitute_gadgets(h, n, p, (s, t)))
        assert (same.exact, cross.exact) == (r.p_same.exact, r.p_cross.exact)


@pytest.mark.parametrize("p", [HALF, F(1, 3)])
def test_reduction_equals_graph_enumeration_on_hollom(p):
    # 18 edges per level: the level-split enumeration handles the full graph
    graph = bbc_gap_exact(substitute_gadgets(build_hollom(), 2, p), method="split")
    reduced = counterexample_gap(2, p)
    assert graph.p_same.exact == reduced.p_same.exact
    assert graph.p_cross.exact == reduced.p_cross.exact
    assert reduced.method == "kernel-reduction"


def test_counterexample_reports():
    r = counterexample_gap(14, HALF)
    assert r.sign is Sign.NEGATIVE
    assert -48 <= r.gap.log10_abs_window()[0] <= -46
    assert r.instance_summary == {"vertices": 82, "edges": 162, "transversal": 3}
    r = counterexample_gap(5, F(349, 10000))
    assert r.sign is Sign.NEGATIVE
    assert -79 <= r.gap.log10_abs_window()[0] <= -77
    assert r.instance_summary == {"vertices": 28, "edges": 54, "transversal": 3}
    with pytest.raises(ValueError):
        counterexample_gap(1, HALF)


def test_counterexample_interval_without_escalation_can_be_uncertified():
    r = counterexample_gap(14, HALF, mode="interval", bits=32, escalate=False)
    assert r.sign is Sign.UNCERTIFIED
    r = counterexample_gap(14, HALF, mode="interval", bits=32)
    assert r.sign is Sign.NEGATIVE and r.precision_bits > 32


def test_complete_bbc_examples():
    r = complete_bbc_gap_exact(K2, 0, 1)
    assert (r.p_same.exact, r.p_cross.exact, r.gap.exact) == (F(9, 16), F(7, 16), F(1, 8))
    with pytest.raises(ValueError):
        complete_bbc_gap_exact(WeightedGraph(1, ()), 0, 0)
    p3 = WeightedGraph.uniform(3, [(0, 1), (1, 2)])
    r = complete_bbc_gap_exact(p3, 0, 2)
    assert r.sign is Sign.POSITIVE
    n = 3
    edges = list(p3.edges) + [(a + n, b + n, q) for a, b, q in p3.edges] + [(w, w + n, HALF) for w in range(n)]
    same, cross = subset_probabilities(2 * n, edges, [(0, 2), (0, 2 + n)])
    assert (r.p_same.exact, r.p_cross.exact) == (same, cross)


def test_pole_swap_leaves_gap_unchanged():
    rng = random.Random(23)
    for _ in range(20):
        b = random_instance(rng, probs=(F(1, 3), HALF, F(2, 3)))
        swapped = BunkbedInstance(b.base, b.transversal, b.pole_v, b.pole_u)
        a, c = bbc_gap_exact(b), bbc_gap_exact(swapped)
        assert (a.p_same.exact, a.p_cross.exact) == (c.p_same.exact, c.p_cross.exact)


def test_univariate_polynomial_examples():
    assert all(c == 0 for c in gap_polynomial_univariate(BunkbedInstance(K2, frozenset({0}), 0, 1)).coefficients)
    poly = gap_polynomial_univariate(BunkbedInstance(K2, frozenset(), 0, 1))
    assert poly.coefficients == (0, 1, 0)
    assert poly.degree == 1


def test_univariate_polynomial_matches_exact_gap():
    rng = random.Random(29)
    for _ in range(20):
        b = random_instance(rng)
        poly = gap_polynomial_univariate(b)
        for p in (F(1, 4), HALF, F(2, 3)):
            exact = bbc_gap_exact(BunkbedInstance(b.base.with_probability(p), b.transversal, b.pole_u, b.pole_v))
            assert poly(p) == exact.gap.exact


def test_univariate_degree_bound_and_endpoints():
    rng = random.Random(31)
    checked = 0
    for _ in range(40):
        b = random_instance(rng)
        poly = gap_polynomial_univariate(b)
        assert len(poly.coefficients) <= 2 * b.base.edge_count + 1
        assert poly(0) == 0
        if b.base.is_connected() and b.transversal:
            assert poly(1) == 0
            checked += 1
    assert checked > 0


def test_per_edge_polynomial_examples():
    zero = gap_polynomial_per_edge(BunkbedInstance(K2, frozenset({0}), 0, 1))
    assert zero.coefficients == {}
    single = gap_polynomial_per_edge(BunkbedInstance(K2, frozenset(), 0, 1))
    assert single.coefficients == {(1,): 1}
    assert single.negative_terms() == {}


def test_per_edge_polynomial_matches_exact_gap():
    rng = random.Random(37)
    for _ in range(10):
        b = random_instance(rng, n=4, m=rng.randint(2, 5))
        poly = gap_polynomial_per_edge(b)
        xs = [rng.choice((F(1, 3), HALF, F(3, 5))) for _ in range(b.base.edge_count)]
        weighted = WeightedGraph(b.base.vertex_count, tuple(Edge(e.u, e.v, x) for e, x in zip(b.base.edges, xs)))
        exact = bbc_gap_exact(BunkbedInstance(weighted, b.transversal, b.pole_u, b.pole_v))
        assert poly(xs) == exact.gap.exact
        assert poly([HALF] * b.base.edge_count) == bbc_gap_exact(
            BunkbedInstance(b.base.with_probability(HALF), b.transversal, b.pole_u, b.pole_v)).gap.exact


def test_per_edge_projects_onto_univariate():
    rng = random.Random(41)
    for _ in range(10):
        b = random_instance(rng, n=4, m=rng.randint(1, 5))
        assert gap_polynomial_per_edge(b).to_univariate() == gap_polynomial_univariate(b)


def test_per_edge_polynomial_can_have_negative_coefficients():
    # path 0-1-2 with the post at the middle vertex
    b = BunkbedInstance(WeightedGraph.uniform(3, [(0, 1), (1, 2)]), frozenset({1}), 0, 2)
    assert gap_polynomial_per_edge(b).coefficients == {}
    c4 = BunkbedInstance(WeightedGraph.uniform(4, [(0, 1), (1, 2), (2, 3), (3, 0)]), frozenset({1}), 0, 2)
    poly = gap_polynomial_per_edge(c4)
    assert poly.negative_terms()
    assert poly([HALF] * 4) >= 0


def test_per_edge_cap():
    g = WeightedGraph.uniform(6, list(itertools.combinations(range(6), 2))[:11])
    with pytest.raises(EnumerationCapExceeded):
        gap_polynomial_per_edge(BunkbedInstance(g, frozenset(), 0, 1))


def test_scan_graph_matches_single_instances():
    g = WeightedGraph.uniform(4, [(0, 1), (1, 2), (2, 3), (0, 2)], p=F(2, 5))
    for tset, u, v, gap in scan_graph(g):
        assert gap == bbc_gap_exact(BunkbedInstance(g, tset, u, v)).gap.exact


def test_batch_scan_k2_and_empty():
    rep = batch_scan([K2])
    assert rep.graphs == 1 and rep.instances == 4
    assert rep.min_gap == 0 and rep.witness["transversal"] == [0]
    empty = batch_scan([])
    assert (empty.graphs, empty.instances, empty.min_gap, empty.violations) == (0, 0, None, [])


def test_batch_scan_streams_violations_and_logs_errors():
    records = []
    rep = batch_scan([FormatError("broken", 3), ("triangle", WeightedGraph.uniform(3, [(0, 1), (1, 2), (0, 2)]))],
                     emit=records.append, verbose=True)
    assert rep.graphs == 1 and len(rep.errors) == 1
    assert len(records) == rep.instances == 8 * 3
    assert all(r["type"] == "instance" for r in records)


def test_batch_scan_reports_negative_gaps(monkeypatch):
    import bunkbed.analysis as analysis

    def fake_scan(g, transversals, poles, cap):
        yield frozenset({0}), 0, 1, F(-1, 10 ** 50)
        yield frozenset(), 0, 1, F(1, 2)

    monkeypatch.setattr(analysis, "scan_graph", fake_scan)
    records = []
    rep = batch_scan([("g", K2)], emit=records.append)
    assert rep.min_gap == F(-1, 10 ** 50)
    assert rep.witness == {"graph": "g", "transversal": [0], "u": 0, "v": 1, "gap": "-1/" + "1" + "0" * 50}
    assert records == [{"type": "violation", **rep.witness}]
    assert len(rep.violations) == 1


def test_batch_scan_parallel_matches_sequential():
    graphs = [K2, K4, WeightedGraph.uniform(3, [(0, 1), (1, 2)])]
    a = batch_scan(graphs, workers=1)
    b = batch_scan(graphs, workers=2)
    assert a.summary() == b.summary()
