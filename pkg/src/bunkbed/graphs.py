"""Graph and hypergraph types plus the deterministic builders.

Vertices are dense 0-based indices everywhere; human-readable names
("u1", "v_3", ...) live in an optional side map so that the enumeration
kernels can index plain arrays.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, NamedTuple

ONE = Fraction(1)
HALF = Fraction(1, 2)


def as_fraction(value) -> Fraction:
    """Coerce ints, Fractions and decimal/ratio strings to an exact Fraction.

    Floats are rejected: a binary float like 0.0349 is not the decimal
    0.0349 and silently accepting it would defeat exact arithmetic.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not probabilities")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    if isinstance(value, float):
        raise TypeError(f"pass probabilities as exact rationals, not float {value!r}")
    return Fraction(value)


class Edge(NamedTuple):
    u: int
    v: int
    p: Fraction


@dataclass(frozen=True)
class WeightedGraph:
    """Finite multigraph where every edge is open independently with ``p``."""

    vertex_count: int
    edges: tuple[Edge, ...] = ()
    labels: Mapping[int, str] = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        if self.vertex_count < 0:
            raise ValueError("vertex_count must be non-negative")
        norm = []
        for e in self.edges:
            u, v, p = e
            p = as_fraction(p)
            if not (0 <= u < self.vertex_count and 0 <= v < self.vertex_count):
                raise ValueError(f"edge ({u}, {v}) has an endpoint outside 0..{self.vertex_count - 1}")
            if u == v:
                raise ValueError(f"self-loop at vertex {u}")
            if not 0 <= p <= 1:
                raise ValueError(f"edge ({u}, {v}) probability {p} outside [0, 1]")
            norm.append(Edge(int(u), int(v), p))
        object.__setattr__(self, "edges", tuple(norm))
        object.__setattr__(self, "labels", dict(self.labels))

    @classmethod
    def uniform(cls, vertex_count: int, pairs: Iterable[tuple[int, int]], p=HALF, labels=None) -> WeightedGraph:
        p = as_fraction(p)
        return cls(vertex_count, tuple(Edge(u, v, p) for u, v in pairs), labels or {})

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def label(self, v: int) -> str:
        return self.labels.get(v, str(v))

    def with_probability(self, p) -> WeightedGraph:
        """Same multigraph with every edge reset to open probability ``p``."""
        p = as_fraction(p)
        return WeightedGraph(self.vertex_count, tuple(Edge(u, v, p) for u, v, _ in self.edges), self.labels)

    def canonical(self) -> WeightedGraph:
        """Edges oriented ``u < v`` and sorted by (min, max, insertion index)."""
        order = sorted(range(len(self.edges)), key=lambda i: (*sorted(self.edges[i][:2]), i))
        edges = []
        for i in order:
            u, v, p = self.edges[i]
            edges.append(Edge(min(u, v), max(u, v), p))
        return WeightedGraph(self.vertex_count, tuple(edges), self.labels)

    def is_connected(self) -> bool:
        if self.vertex_count <= 1:
            return True
        parent = list(range(self.vertex_count))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for u, v, _ in self.edges:
            parent[find(u)] = find(v)
        root = find(0)
        return all(find(x) == root for x in range(self.vertex_count))


@dataclass(frozen=True)
class BunkbedInstance:
    """Base graph, transversal set ``T`` and a pole pair ``(u, v)``."""

    base: WeightedGraph
    transversal: frozenset[int]
    pole_u: int
    pole_v: int

    def __post_init__(self):
        t = frozenset(int(w) for w in self.transversal)
        n = self.base.vertex_count
        bad = [w for w in t if not 0 <= w < n]
        if bad:
            raise ValueError(f"transversal vertices {sorted(bad)} outside the base graph")
        for pole in (self.pole_u, self.pole_v):
            if not 0 <= pole < n:
                raise ValueError(f"pole {pole} outside the base graph")
        object.__setattr__(self, "transversal", t)

    def summary(self) -> dict:
        return {
            "vertices": self.base.vertex_count,
            "edges": self.base.edge_count,
            "transversal": len(self.transversal),
        }


class Hyperedge(NamedTuple):
    apex: int
    b: int
    c: int


@dataclass(frozen=True)
class Hypergraph3:
    """3-uniform hypergraph; each hyperedge stores its transversal apex first."""

    vertex_count: int
    hyperedges: tuple[Hyperedge, ...]
    transversal: frozenset[int] = frozenset()
    labels: Mapping[int, str] = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        hs = []
        for h in self.hyperedges:
            a, b, c = (int(x) for x in h)
            if len({a, b, c}) != 3:
                raise ValueError(f"hyperedge {(a, b, c)} repeats a vertex")
            for x in (a, b, c):
                if not 0 <= x < self.vertex_count:
                    raise ValueError(f"hyperedge vertex {x} outside 0..{self.vertex_count - 1}")
            hs.append(Hyperedge(a, b, c))
        object.__setattr__(self, "hyperedges", tuple(hs))
        object.__setattr__(self, "transversal", frozenset(int(w) for w in self.transversal))
        object.__setattr__(self, "labels", dict(self.labels))

    def check_wz(self) -> None:
        """Raise unless every hyperedge has exactly its apex in the transversal set."""
        for i, (a, b, c) in enumerate(self.hyperedges):
            if a not in self.transversal or b in self.transversal or c in self.transversal:
                raise ValueError(
                    f"hyperedge {i} {(a, b, c)} does not have exactly one transversal vertex at the apex"
                )

    def label(self, v: int) -> str:
        return self.labels.get(v, str(v))


@dataclass(frozen=True)
class GadgetHandle:
    graph: WeightedGraph
    terminal_a: int
    terminal_b: int
    terminal_c: int


def build_gadget(n: int, p) -> GadgetHandle:
    """Fan graph: apex ``a`` joined to every vertex of the path ``v_1 .. v_n``.

    Vertex 0 is the apex and vertex ``i`` is ``v_i``.  Path edges are open
    with probability ``p`` and spokes with ``1 - p``; path edges come first
    in the edge list.
    """
    if n < 1:
        raise ValueError("gadget needs n >= 1")
    p = as_fraction(p)
    if not 0 < p < 1:
        raise ValueError("gadget probability must lie strictly between 0 and 1")
    q = 1 - p
    edges = [Edge(i, i + 1, p) for i in range(1, n)]
    edges += [Edge(0, k, q) for k in range(1, n + 1)]
    labels = {0: "a", **{i: f"v{i}" for i in range(1, n + 1)}}
    return GadgetHandle(WeightedGraph(n + 1, tuple(edges), labels), 0, 1, n)


# u1..u10 map to 0..9; hyperedges in the path order used by the robust lemma.
_HOLLOM_EDGES = ((1, 2, 3), (3, 6, 9), (5, 6, 7), (2, 4, 5), (4, 7, 8), (8, 9, 10))
_HOLLOM_T = frozenset({2, 7, 9})


def build_hollom() -> Hypergraph3:
    """Hollom's ten-vertex, six-hyperedge hypergraph with T = {u2, u7, u9}."""
    hyperedges = []
    for triple in _HOLLOM_EDGES:
        (apex,) = [x for x in triple if x in _HOLLOM_T]
        rest = [x for x in triple if x != apex]
        hyperedges.append(Hyperedge(apex - 1, rest[0] - 1, rest[1] - 1))
    labels = {i: f"u{i + 1}" for i in range(10)}
    return Hypergraph3(10, tuple(hyperedges), frozenset(w - 1 for w in _HOLLOM_T), labels)


HOLLOM_POLES = (0, 9)  # u1, u10


def substitute_gadgets(h: Hypergraph3, n: int, p, poles: tuple[int, int] = HOLLOM_POLES) -> BunkbedInstance:
    """Replace every hyperedge of ``h`` by a fresh copy of the gadget ``G_n``.

    The gadget apex is glued to the hyperedge apex, ``v_1`` to ``b`` and
    ``v_n`` to ``c``; the ``n - 2`` interior path vertices are new and are
    numbered after the hypergraph vertices, gadget by gadget.
    """
    if n < 2:
        raise ValueError("substitution needs n >= 2 so that b and c stay distinct")
    h.check_wz()
    gadget = build_gadget(n, p).graph
    labels = dict(h.labels)
    edges: list[Edge] = []
    next_vertex = h.vertex_count
    for index, (a, b, c) in enumerate(h.hyperedges):
        relabel = {0: a, 1: b, n: c}
        for i in range(2, n):
            relabel[i] = next_vertex
            labels[next_vertex] = f"g{index}.v{i}"
            next_vertex += 1
        edges.extend(Edge(relabel[x], relabel[y], q) for x, y, q in gadget.edges)
    graph = WeightedGraph(next_vertex, tuple(edges), labels)
    return BunkbedInstance(graph, h.transversal, poles[0], poles[1])


def build_bunkbed_graph(b: BunkbedInstance, post_prob=ONE) -> WeightedGraph:
    """Two copies of the base graph joined by posts at the transversal vertices.

    Vertex ``w`` of the base graph becomes ``w`` (level 0) and
    ``w + |V|`` (level 1).  Edge order: level-0 edges, level-1 edges, then
    posts in increasing vertex order.
    """
    g = b.base
    n = g.vertex_count
    post_prob = as_fraction(post_prob)
    edges = list(g.edges)
    edges += [Edge(u + n, v + n, p) for u, v, p in g.edges]
    edges += [Edge(w, w + n, post_prob) for w in sorted(b.transversal)]
    labels = {}
    for v in range(n):
        labels[v] = g.label(v)
        labels[v + n] = g.label(v) + "'"
    return WeightedGraph(2 * n, tuple(edges), labels)


def build_product_graph(g: WeightedGraph, post_prob=HALF) -> WeightedGraph:
    """``G x K_2``: the bunkbed graph with every vertex carrying a post."""
    return build_bunkbed_graph(BunkbedInstance(g, frozenset(range(g.vertex_count)), 0, 0), post_prob)


def build_complete_clone_instance(k: int, n: int = 1204, p=HALF) -> WeightedGraph:
    """Counterexample graph with ``k - 1`` extra clones of each transversal vertex.

    Each clone of a transversal vertex ``w`` is joined, with open
    probability 1/2, to the two lowest-indexed spoke endpoints of ``w`` in
    each of the two gadgets whose apex is ``w``.  This wiring is a
    convention; only the resulting vertex and edge counts are pinned.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    h = build_hollom()
    inst = substitute_gadgets(h, n, p)
    g = inst.base
    spokes: dict[int, list[list[int]]] = {w: [] for w in sorted(h.transversal)}
    # spoke edges of gadget i occupy the last n entries of its 2n-1 block
    block = 2 * n - 1
    for i, hedge in enumerate(h.hyperedges):
        gadget_edges = g.edges[i * block:(i + 1) * block]
        ends = sorted(y if x == hedge.apex else x for x, y, _ in gadget_edges[n - 1:])
        spokes[hedge.apex].append(ends[:2])
    edges = list(g.edges)
    labels = dict(g.labels)
    nv = g.vertex_count
    clone_p = HALF
    for w in sorted(h.transversal):
        if len(spokes[w]) != 2:
            raise ValueError(f"transversal vertex {w} is not the apex of exactly two gadgets")
        targets = spokes[w][0] + spokes[w][1]
        for j in range(1, k):
            labels[nv] = f"{g.label(w)}*{j}"
            edges.extend(Edge(nv, t, clone_p) for t in targets)
            nv += 1
    out = WeightedGraph(nv, tuple(edges), labels)
    expected_v = g.vertex_count + 3 * (k - 1)
    expected_e = g.edge_count + 12 * (k - 1)
    if (out.vertex_count, out.edge_count) != (expected_v, expected_e):
        raise AssertionError(
            f"clone build produced {out.vertex_count}/{out.edge_count}, expected {expected_v}/{expected_e}"
        )
    return out
