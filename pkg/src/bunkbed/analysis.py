"""Bunkbed probability gaps: brute force, kernel reduction, polynomials, scans.

The gap of an instance is ``P[u0 <-> v0] - P[u0 <-> v1]``; a negative gap
is a counterexample to the bunkbed inequality.
"""
from __future__ import annotations

import enum
import itertools
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable

import numpy as np

from . import kernels
from .certified import CertifiedNumber
from .exact import (
    DEFAULT_CAP,
    EnumerationCapExceeded,
    Prepared,
    _mass,
    bernstein_to_monomial,
    check_cap,
    gadget_kernel_closed,
    outcome_counts,
    prepare,
)
from .graphs import (
    HOLLOM_POLES,
    BunkbedInstance,
    Edge,
    WeightedGraph,
    as_fraction,
    build_bunkbed_graph,
    build_hollom,
    build_product_graph,
)
from .hyper import wz_bunkbed_probs, wz_count_table

log = logging.getLogger(__name__)


class Sign(str, enum.Enum):
    NEGATIVE = "negative"
    ZERO = "zero"
    POSITIVE = "positive"
    UNCERTIFIED = "uncertified"

    @classmethod
    def of(cls, x: CertifiedNumber) -> Sign:
        s = x.sign()
        return {None: cls.UNCERTIFIED, -1: cls.NEGATIVE, 0: cls.ZERO, 1: cls.POSITIVE}[s]


@dataclass(frozen=True)
class GapReport:
    p_same: CertifiedNumber
    p_cross: CertifiedNumber
    gap: CertifiedNumber
    sign: Sign
    method: str
    instance_summary: dict
    precision_bits: int | None = None
    work: int = 0

    @classmethod
    def build(cls, same, cross, method, summary, bits=None, work=0) -> GapReport:
        same = same if isinstance(same, CertifiedNumber) else CertifiedNumber.of(same)
        cross = cross if isinstance(cross, CertifiedNumber) else CertifiedNumber.of(cross)
        gap = same - cross
        return cls(same, cross, gap, Sign.of(gap), method, dict(summary), bits, work)


# --------------------------------------------------------------------------
# brute force on graphs


def bbc_gap_exact(b: BunkbedInstance, cap: int = DEFAULT_CAP, method: str = "brute-force",
                  workers=None) -> GapReport:
    """Exact gap by enumerating level-edge subsets.

    ``brute-force`` enumerates all ``2 ** (2m)`` subsets of the bunkbed
    graph with posts contracted.  ``split`` enumerates the ``2 ** m``
    subsets of one level and joins the two independent levels through the
    posts; it is exact too and reaches twice the edge count.
    """
    if method == "split":
        return _bbc_gap_split(b, cap)
    if method != "brute-force":
        raise ValueError(f"unknown method {method!r}")
    g = build_bunkbed_graph(b)
    n = b.base.vertex_count
    prep = prepare(g)
    check_cap(len(prep.us), cap)
    counts = outcome_counts(prep, [(b.pole_u, b.pole_v), (b.pole_u, b.pole_v + n)], workers)
    same = _mass(prep, counts, [1, 3])
    cross = _mass(prep, counts, [2, 3])
    return GapReport.build(same, cross, "brute-force", b.summary(), work=1 << len(prep.us))


@dataclass(frozen=True)
class LevelPartitions:
    """Distribution of the partition one level induces on ``keys``.

    ``weights[rgs]`` is an integer; the probability is ``weights / denominator``.
    """

    keys: tuple[int, ...]
    weights: dict
    denominator: int
    work: int


def level_partitions(g: WeightedGraph, keys, cap: int = DEFAULT_CAP) -> LevelPartitions:
    prep = prepare(g)
    check_cap(len(prep.us), cap)
    mapped = [prep.vertex_map[k] for k in keys]
    codes, cvs = kernels.subset_partitions(prep.vertex_count, prep.us, prep.vs, prep.strides, mapped)
    pairs = np.stack([codes.astype(np.int64), cvs], axis=1)
    uniq, counts = np.unique(pairs, axis=0, return_counts=True)
    nums, gaps, den = _class_powers(prep)
    weights: dict = {}
    for (code, cv), cnt in zip(uniq.tolist(), counts.tolist()):
        term = cnt
        for c, k in enumerate(prep.decode(cv)):
            term *= nums[c][k] * gaps[c][prep.class_sizes[c] - k]
        rgs = tuple((code >> (4 * i)) & 15 for i in range(len(keys)))
        weights[rgs] = weights.get(rgs, 0) + term
    return LevelPartitions(tuple(keys), weights, den, 1 << len(prep.us))


def _class_powers(prep: Prepared):
    nums, gaps, den = [], [], 1
    for p, size in zip(prep.classes, prep.class_sizes):
        a, d = p.numerator, p.denominator
        nums.append([a ** k for k in range(size + 1)])
        gaps.append([(d - a) ** k for k in range(size + 1)])
        den *= d ** size
    return nums, gaps, den


class _JoinDSU:
    __slots__ = ("parent",)

    def __init__(self, n):
        self.parent = list(range(n))

    def find(self, x):
        p = self.parent
        while p[x] != x:
            p[x] = p[p[x]]
            x = p[x]
        return x

    def union(self, x, y):
        x, y = self.find(x), self.find(y)
        if x != y:
            self.parent[x] = y


def _bbc_gap_split(b: BunkbedInstance, cap: int) -> GapReport:
    tset = sorted(b.transversal)
    keys = [b.pole_u, b.pole_v] + tset
    lp = level_partitions(b.base, keys, cap)
    r = len(keys)
    same = cross = 0
    for p0, w0 in lp.weights.items():
        for p1, w1 in lp.weights.items():
            dsu = _JoinDSU(2 * r)
            for i in range(2, r):
                dsu.union(p0[i], r + p1[i])
            root = dsu.find(p0[0])
            if root == dsu.find(p0[1]):
                same += w0 * w1
            if root == dsu.find(r + p1[1]):
                cross += w0 * w1
    den = lp.denominator ** 2
    return GapReport.build(Fraction(same, den), Fraction(cross, den), "brute-force", b.summary(),
                           work=2 * lp.work)


def complete_bbc_gap_exact(g: WeightedGraph, u: int, v: int, post_prob=Fraction(1, 2),
                           cap: int = DEFAULT_CAP, workers=None) -> GapReport:
    """Gap on ``G x K_2`` where posts are random too (open with ``post_prob``)."""
    if u == v:
        raise ValueError("complete bunkbed gap needs distinct poles")
    prod = build_product_graph(g, post_prob)
    n = g.vertex_count
    prep = prepare(prod)
    check_cap(len(prep.us), cap)
    counts = outcome_counts(prep, [(u, v), (u, v + n)], workers)
    same = _mass(prep, counts, [1, 3])
    cross = _mass(prep, counts, [2, 3])
    summary = {"vertices": n, "edges": g.edge_count, "transversal": n}
    return GapReport.build(same, cross, "brute-force", summary, work=1 << len(prep.us))


# --------------------------------------------------------------------------
# kernel reduction


def counterexample_instance_summary(n: int) -> dict:
    h = build_hollom()
    m = len(h.hyperedges)
    return {"vertices": h.vertex_count + m * (n - 2), "edges": m * (2 * n - 1), "transversal": len(h.transversal)}


def counterexample_gap(n: int, p, mode: str = "exact", bits: int = 65536, escalate: bool = True,
                       max_bits: int = 1 << 18, method: str = "split") -> GapReport:
    """Gap of Hollom's hypergraph with every hyperedge replaced by ``G_n``.

    Each gadget only touches the rest of the graph through its three
    terminals, gadget interiors are independent, and posts sit only on
    apexes, so the graph's bunkbed probabilities equal the WZ probabilities
    of the hypergraph under the gadget kernel.
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    k = gadget_kernel_closed(n, as_fraction(p))
    h = build_hollom()
    s, t = HOLLOM_POLES
    table = wz_count_table(h, s, t, method)
    summary = counterexample_instance_summary(n)
    if mode == "exact":
        same, cross = wz_bunkbed_probs(h, k, s, t, "exact", method=method)
        return GapReport.build(same, cross, "kernel-reduction", summary, work=table.work)
    if mode != "interval":
        raise ValueError(f"unknown mode {mode!r}")
    if not escalate:
        same, cross = wz_bunkbed_probs(h, k, s, t, "interval", bits, method)
        return GapReport.build(same, cross, "kernel-reduction", summary, bits, table.work)
    used = bits
    while True:
        same, cross = wz_bunkbed_probs(h, k, s, t, "interval", used, method)
        gap = same - cross
        if gap.sign() is not None or used * 2 > max_bits:
            return GapReport.build(same, cross, "kernel-reduction", summary, used, table.work)
        log.info("gap sign not certified at %d bits, escalating", used)
        used *= 2


# --------------------------------------------------------------------------
# polynomials


@dataclass(frozen=True)
class UnivariateGapPolynomial:
    coefficients: tuple[Fraction, ...]

    def __call__(self, p) -> Fraction:
        p = as_fraction(p)
        acc = Fraction(0)
        for c in reversed(self.coefficients):
            acc = acc * p + c
        return acc

    @property
    def degree(self) -> int:
        for i in range(len(self.coefficients) - 1, -1, -1):
            if self.coefficients[i]:
                return i
        return -1


@dataclass(frozen=True)
class PerEdgeGapPolynomial:
    """Coefficients keyed by exponent vectors, one exponent in {0,1,2} per base edge."""

    variables: int
    coefficients: dict = field(default_factory=dict)

    def __call__(self, xs) -> Fraction:
        xs = [as_fraction(x) for x in xs]
        if len(xs) != self.variables:
            raise ValueError(f"expected {self.variables} values")
        total = Fraction(0)
        for exps, c in self.coefficients.items():
            term = c
            for x, e in zip(xs, exps):
                if e:
                    term *= x ** e
            total += term
        return total

    def negative_terms(self) -> dict:
        return {e: c for e, c in self.coefficients.items() if c < 0}

    def to_univariate(self) -> UnivariateGapPolynomial:
        coeffs = [Fraction(0)] * (2 * self.variables + 1)
        for exps, c in self.coefficients.items():
            coeffs[sum(exps)] += c
        return UnivariateGapPolynomial(tuple(coeffs))


def _posts_contracted(b: BunkbedInstance) -> tuple[WeightedGraph, int, int, int]:
    """Bunkbed graph with every post's level-1 end merged into its level-0 end."""
    n = b.base.vertex_count
    level1 = {}
    nxt = n
    for x in range(n):
        if x in b.transversal:
            level1[x] = x
        else:
            level1[x] = nxt
            nxt += 1
    edges = list(b.base.edges)
    edges += [Edge(level1[u], level1[v], p) for u, v, p in b.base.edges]
    return WeightedGraph(nxt, tuple(edges)), b.pole_u, b.pole_v, level1[b.pole_v]


def _pair_diff(b: BunkbedInstance, classes, cap):
    g, u, v, v1 = _posts_contracted(b)
    check_cap(g.edge_count, cap)
    prep = prepare(g, classes=classes)
    counts = outcome_counts(prep, [(u, v), (u, v1)])
    diff = (counts[1] + counts[3]) - (counts[2] + counts[3])
    return prep, diff


def gap_polynomial_univariate(b: BunkbedInstance, cap: int = DEFAULT_CAP) -> UnivariateGapPolynomial:
    """Gap as a polynomial in one shared edge probability ``p`` (stored weights ignored)."""
    m2 = 2 * b.base.edge_count
    if b.pole_u == b.pole_v:
        return UnivariateGapPolynomial(tuple([Fraction(0)] * (m2 + 1)))
    if m2 == 0:
        return UnivariateGapPolynomial((Fraction(0),))
    _, diff = _pair_diff(b, [0] * m2, cap)
    mono = bernstein_to_monomial({k: int(c) for k, c in enumerate(diff)}, m2)
    return UnivariateGapPolynomial(tuple(Fraction(c) for c in mono))


_BERNSTEIN2 = np.array([[1, -2, 1], [0, 1, -1], [0, 0, 1]], dtype=np.int64)


def gap_polynomial_per_edge(b: BunkbedInstance, max_edges: int = 10) -> PerEdgeGapPolynomial:
    """Gap with one variable ``x_e`` per base edge, shared by ``e`` and ``e'``."""
    m = b.base.edge_count
    if m > max_edges:
        raise EnumerationCapExceeded(f"{m} base edges exceed the per-edge polynomial cap of {max_edges}")
    if m == 0 or b.pole_u == b.pole_v:
        return PerEdgeGapPolynomial(m, {})
    prep, diff = _pair_diff(b, list(range(m)) * 2, 2 * max_edges)
    # class c is edge c (size 2); edge 0 is the fastest digit
    if prep.class_sizes != [2] * m:
        raise AssertionError("unexpected class layout")
    arr = diff.reshape((3,) * m, order="F")
    for axis in range(m):
        arr = np.moveaxis(np.tensordot(_BERNSTEIN2.T, arr, axes=([1], [axis])), 0, axis)
    coeffs = {}
    for idx in zip(*np.nonzero(arr)):
        coeffs[tuple(int(i) for i in idx)] = Fraction(int(arr[idx]))
    return PerEdgeGapPolynomial(m, dict(sorted(coeffs.items())))


# --------------------------------------------------------------------------
# exhaustive scanning


@dataclass
class ScanReport:
    graphs: int = 0
    instances: int = 0
    min_gap: Fraction | None = None
    witness: dict | None = None
    violations: list = field(default_factory=list)
    errors: list = field(default_factory=list)

    def summary(self) -> dict:
        return {
            "graphs": self.graphs,
            "instances": self.instances,
            "min_gap": None if self.min_gap is None else str(self.min_gap),
            "witness": self.witness,
            "violations": len(self.violations),
            "errors": len(self.errors),
        }


def scan_graph(g: WeightedGraph, transversals=None, poles=None, cap: int = DEFAULT_CAP):
    """Yield ``(T, u, v, gap)`` for every transversal set and pole pair of ``g``.

    Each level's partition distribution over all vertices is computed once;
    every ``(T, u, v)`` then only needs a join of two partitions through
    the posts at ``T``.
    """
    n = g.vertex_count
    if n > 16:
        raise EnumerationCapExceeded("scans are limited to 16 vertices")
    lp = level_partitions(g, list(range(n)), cap)
    den = lp.denominator ** 2
    if transversals is None:
        transversals = [frozenset(i for i in range(n) if mask >> i & 1) for mask in range(1 << n)]
    if poles is None:
        poles = list(itertools.combinations(range(n), 2))
    parts = list(lp.weights.items())
    for tset in transversals:
        tlist = sorted(tset)
        totals = dict.fromkeys(poles, 0)
        for p0, w0 in parts:
            for p1, w1 in parts:
                dsu = _JoinDSU(2 * n)
                for w in tlist:
                    dsu.union(p0[w], n + p1[w])
                weight = w0 * w1
                for u, v in poles:
                    root = dsu.find(p0[u])
                    same = root == dsu.find(p0[v])
                    cross = root == dsu.find(n + p1[v])
                    if same != cross:
                        totals[(u, v)] += weight if same else -weight
        for (u, v) in poles:
            yield frozenset(tset), u, v, Fraction(totals[(u, v)], den)


def _scan_one(args):
    g, transversals, poles, cap = args
    try:
        return list(scan_graph(g, transversals, poles, cap)), None
    except (EnumerationCapExceeded, ValueError) as exc:
        return None, str(exc)


def batch_scan(graphs: Iterable, p=None, transversals=None, poles=None, cap: int = DEFAULT_CAP,
               emit: Callable[[dict], None] | None = None, verbose: bool = False,
               workers: int | None = None) -> ScanReport:
    """Scan a stream of graphs; violations (negative gaps) are emitted as found.

    ``p`` resets every edge to that probability; ``None`` keeps each
    graph's own weights.  Stream items may be graphs, ``FormatError``
    instances (logged and skipped) or ``(label, item)`` pairs.  With
    ``workers > 1`` whole graphs go to worker processes; results are still
    merged in input order.
    """
    report = ScanReport()

    def jobs():
        for index, item in enumerate(graphs):
            label = index
            if isinstance(item, tuple):
                label, item = item
            if isinstance(item, Exception):
                report.errors.append({"graph": label, "error": str(item)})
                log.warning("graph %s skipped: %s", label, item)
                continue
            g = item if p is None else item.with_probability(p)
            yield label, (g, transversals, poles, cap)

    workers = workers or kernels.default_workers()
    if workers > 1:
        from concurrent.futures import ProcessPoolExecutor

        labelled = list(jobs())
        with ProcessPoolExecutor(workers) as pool:
            outcomes = zip((lb for lb, _ in labelled), pool.map(_scan_one, [job for _, job in labelled]))
            _merge(report, outcomes, emit, verbose)
    else:
        _merge(report, ((label, _scan_one(job)) for label, job in jobs()), emit, verbose)
    return report


def _merge(report: ScanReport, outcomes, emit, verbose) -> None:
    for label, (results, error) in outcomes:
        report.graphs += 1
        if error is not None:
            report.errors.append({"graph": label, "error": error})
            log.warning("graph %s failed: %s", label, error)
            continue
        for tset, u, v, gap in results:
            report.instances += 1
            record = {"graph": label, "transversal": sorted(tset), "u": u, "v": v, "gap": str(gap)}
            if report.min_gap is None or gap < report.min_gap:
                report.min_gap = gap
                report.witness = record
            if gap < 0:
                report.violations.append(record)
                if emit:
                    emit({"type": "violation", **record})
            elif verbose and emit:
                emit({"type": "instance", **record})
