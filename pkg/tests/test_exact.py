import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bunkbed.exact import (
    EnumerationCapExceeded,
    HyperedgeKernel,
    TerminalPartition,
    bernstein_to_monomial,
    check_eq390,
    check_hk,
    connect_prob_exact,
    gadget_bc_only_closed,
    gadget_kernel_bruteforce,
    gadget_kernel_closed,
    gadget_marginal_closed,
    gadget_marginal_recurrence,
    gadget_three_closed,
    gadget_three_recurrence,
    kernel_gap_lower_bound,
    terminal_kernel_exact,
)
from bunkbed.graphs import Edge, WeightedGraph, build_gadget

from oracles import fan_edges, subset_probabilities, terminal_partition_probs

HALF = Fraction(1, 2)
F = Fraction


def random_graph(rng, n, m, probs=(F(1, 3), HALF, F(2, 3), F(1), F(0))):
    edges = []
    for _ in range(m):
        u, v = rng.sample(range(n), 2)
        edges.append(Edge(u, v, rng.choice(probs)))
    return WeightedGraph(n, tuple(edges))


def test_terminal_partition_has_five_states():
    assert [t.name for t in TerminalPartition] == ["ABC", "AB_C", "AC_B", "A_BC", "A_B_C"]
    assert [t.field for t in TerminalPartition] == ["p_abc", "p_ab_c", "p_ac_b", "p_a_bc", "p_a_b_c"]


def test_kernel_validation():
    with pytest.raises(ValueError):
        HyperedgeKernel(HALF, HALF, HALF, 0, 0)
    with pytest.raises(ValueError):
        HyperedgeKernel(F(3, 2), F(-1, 2), 0, 0, 0)
    k = HyperedgeKernel(HALF, F(1, 8), F(1, 4), F(1, 8), 0)
    assert k[TerminalPartition.AC_B] == F(1, 4)
    assert k.swap_bc().as_tuple() == (HALF, F(1, 4), F(1, 8), F(1, 8), 0)


@pytest.mark.parametrize("g,u,v,expected", [
    (WeightedGraph.uniform(2, [(0, 1)]), 0, 1, HALF),
    (build_gadget(2, HALF).graph, 0, 2, F(5, 8)),
    (build_gadget(3, HALF).graph, 0, 3, F(21, 32)),
])
def test_connect_prob_examples(g, u, v, expected):
    assert connect_prob_exact(g, u, v) == expected


def test_connect_prob_against_networkx_oracle():
    rng = random.Random(7)
    for _ in range(25):
        g = random_graph(rng, rng.randint(2, 6), rng.randint(1, 9))
        u, v = rng.sample(range(g.vertex_count), 2)
        (expected,) = subset_probabilities(g.vertex_count, list(g.edges), [(u, v)])
        assert connect_prob_exact(g, u, v) == expected


def test_contraction_does_not_change_results():
    rng = random.Random(11)
    for _ in range(20):
        g = random_graph(rng, rng.randint(2, 7), rng.randint(1, 10))
        u, v = rng.sample(range(g.vertex_count), 2)
        assert connect_prob_exact(g, u, v, contract=True) == connect_prob_exact(g, u, v, contract=False)


def test_enumeration_cap():
    g = WeightedGraph.uniform(2, [(0, 1)] * 30)
    with pytest.raises(EnumerationCapExceeded):
        connect_prob_exact(g, 0, 1)
    small = WeightedGraph.uniform(2, [(0, 1)] * 12)
    with pytest.raises(EnumerationCapExceeded):
        connect_prob_exact(small, 0, 1, cap=11)
    assert connect_prob_exact(small, 0, 1, cap=12) == 1 - HALF ** 12


def test_terminal_kernel_examples():
    g = build_gadget(2, HALF)
    assert terminal_kernel_exact(g.graph, 0, 1, 2).as_tuple() == (HALF, F(1, 8), F(1, 8), F(1, 8), F(1, 8))
    tri = WeightedGraph.uniform(3, [(0, 1), (1, 2), (0, 2)], p=F(1))
    assert terminal_kernel_exact(tri, 0, 1, 2).as_tuple() == (1, 0, 0, 0, 0)
    assert terminal_kernel_exact(WeightedGraph(3, ()), 0, 1, 2).as_tuple() == (0, 0, 0, 0, 1)
    with pytest.raises(ValueError):
        terminal_kernel_exact(tri, 0, 0, 2)


@pytest.mark.parametrize("n", [2, 3, 4])
@pytest.mark.parametrize("p", [F(1, 4), HALF, F(2, 3)])
def test_terminal_kernel_against_networkx_oracle(n, p):
    expected = terminal_partition_probs(n + 1, fan_edges(n, p), 0, 1, n)
    assert gadget_kernel_bruteforce(n, p).as_tuple() == expected


@pytest.mark.parametrize("n", range(2, 7))
@pytest.mark.parametrize("p", [F(1, 4), HALF, F(2, 3)])
def test_closed_kernel_equals_enumeration(n, p):
    assert gadget_kernel_closed(n, p) == gadget_kernel_bruteforce(n, p)


def test_marginal_examples():
    assert gadget_marginal_closed(1, HALF) == HALF
    assert gadget_marginal_closed(2, HALF) == F(5, 8)
    assert gadget_marginal_closed(0, F(1, 3)) == 0


def test_three_examples():
    assert gadget_three_closed(1, HALF) == HALF
    assert gadget_three_closed(2, HALF) == HALF
    assert gadget_three_closed(3, HALF) == F(15, 32)
    (expected,) = [terminal_partition_probs(4, fan_edges(3, HALF), 0, 1, 3)[0]]
    assert expected == F(15, 32)


def test_bc_only_examples():
    assert gadget_bc_only_closed(2, HALF) == F(1, 8)
    assert gadget_bc_only_closed(3, HALF) == F(1, 32)
    assert gadget_bc_only_closed(1, F(2, 7)) == F(2, 7)


@pytest.mark.parametrize("p", [F(1, 7), F(1, 3), HALF, F(5, 8), F(99, 100)])
def test_closed_forms_match_recurrences(p):
    for n in range(0, 51):
        assert gadget_marginal_closed(n, p) == gadget_marginal_recurrence(n, p)
        assert gadget_three_closed(n, p) == gadget_three_recurrence(n, p)


def test_kernel_fields():
    k = gadget_kernel_closed(2, HALF)
    assert k.as_tuple() == (HALF, F(1, 8), F(1, 8), F(1, 8), F(1, 8))
    assert gadget_kernel_closed(1204, HALF).p_a_bc == HALF ** 2407
    assert gadget_kernel_closed(14, HALF).p_a_bc == HALF ** 27
    with pytest.raises(ValueError):
        gadget_kernel_closed(1, HALF)


@given(st.integers(2, 60), st.fractions(min_value=F(1, 100), max_value=F(99, 100), max_denominator=100))
@settings(max_examples=60, deadline=None)
def test_closed_kernel_is_normalized_and_symmetric(n, p):
    k = gadget_kernel_closed(n, p)
    assert sum(k.as_tuple()) == 1
    assert k.p_ab_c == k.p_ac_b
    assert all(0 <= x <= 1 for x in k.as_tuple())


def test_threshold_check():
    assert check_eq390(gadget_kernel_closed(1204, HALF))
    assert not check_eq390(gadget_kernel_closed(2, HALF))
    assert check_eq390(HyperedgeKernel(1, 0, 0, 0, 0))


def test_hk_check_examples():
    assert check_hk(gadget_kernel_closed(2, HALF))
    assert not check_hk(HyperedgeKernel(0, HALF, HALF, 0, 0))


def test_hk_holds_for_graph_kernels():
    rng = random.Random(5)
    for _ in range(50):
        g = random_graph(rng, rng.randint(3, 5), 5, probs=(F(1, 3), HALF, F(3, 4)))
        a, b, c = rng.sample(range(g.vertex_count), 3)
        assert check_hk(terminal_kernel_exact(g, a, b, c))


def test_kernel_gap_lower_bound():
    assert kernel_gap_lower_bound(1204, HALF) == F(1201, 3) * HALF ** 2407
    assert kernel_gap_lower_bound(2, HALF) == F(-1, 24)
    k = gadget_kernel_closed(2, HALF)
    assert k.p_abc * k.p_a_b_c - k.p_ab_c ** 2 == F(3, 64)
    with pytest.raises(ValueError):
        kernel_gap_lower_bound(3, F(1))


@given(st.integers(2, 40), st.fractions(min_value=F(1, 50), max_value=F(49, 50), max_denominator=50))
@settings(max_examples=40, deadline=None)
def test_kernel_gap_bound_self_check_never_fires(n, p):
    kernel_gap_lower_bound(n, p)


def test_bernstein_to_monomial():
    # p^1 (1-p)^1 -> p - p^2
    assert bernstein_to_monomial({1: 1}, 2) == [0, 1, -1]
    # sum over all k of C(m,k) p^k (1-p)^(m-k) = 1
    from math import comb
    assert bernstein_to_monomial({k: comb(5, k) for k in range(6)}, 5) == [1, 0, 0, 0, 0, 0]


@pytest.mark.parametrize("p1,p2", [(F(1, 4), HALF), (HALF, F(3, 4))])
def test_connection_probability_is_monotone_in_p(p1, p2):
    rng = random.Random(3)
    for _ in range(10):
        base = random_graph(rng, 5, 6, probs=(HALF,))
        u, v = 0, 4
        assert connect_prob_exact(base.with_probability(p1), u, v) <= connect_prob_exact(base.with_probability(p2), u, v)
