"""Hypergraph percolation on bunkbed hypergraphs.

Two models are covered.  In the alternative model each hyperedge is
retained on exactly one level, chosen by a fair coin.  In the five-state
(WZ) model every hyperedge instance independently draws a
:class:`TerminalPartition` from one shared :class:`HyperedgeKernel`.

Vertex ``w`` of the hypergraph has instances ``w`` (level 0) and
``w + N`` (level 1).  A configuration assigns a state to every hyperedge
instance; instance ``(e, level)`` sits at position ``2 * e + level``.
"""
from __future__ import annotations

import functools
import itertools
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from math import lcm

import gmpy2
import numpy as np
from gmpy2 import mpfr

from . import kernels
from .certified import CertifiedNumber, down, enclose, up
from .exact import EnumerationCapExceeded, HyperedgeKernel, TerminalPartition, check_eq390
from .graphs import HOLLOM_POLES, Hypergraph3, build_hollom

WzConfiguration = tuple  # tuple[TerminalPartition, ...] of length 2 * |hyperedges|

ODOMETER_CAP = 7
SPLIT_CAP = 9

# which (x, y) index pairs of (apex, b, c) a state joins
_JOINS = {
    TerminalPartition.ABC: ((0, 1), (0, 2)),
    TerminalPartition.AB_C: ((0, 1),),
    TerminalPartition.AC_B: ((0, 2),),
    TerminalPartition.A_BC: ((1, 2),),
    TerminalPartition.A_B_C: (),
}


class AdmissibleKernelViolation(RuntimeError):
    """A kernel passing the threshold test produced a certified non-negative gap."""


class _DSU:
    __slots__ = ("parent",)

    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, x: int) -> int:
        parent = self.parent
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(self, x: int, y: int) -> None:
        x, y = self.find(x), self.find(y)
        if x != y:
            self.parent[x] = y


def _bunkbed_dsu(h: Hypergraph3, cfg) -> _DSU:
    n = h.vertex_count
    if len(cfg) != 2 * len(h.hyperedges):
        raise ValueError(f"configuration has {len(cfg)} states, expected {2 * len(h.hyperedges)}")
    dsu = _DSU(2 * n)
    for w in h.transversal:
        dsu.union(w, w + n)
    for pos, state in enumerate(cfg):
        e, level = divmod(pos, 2)
        tri = h.hyperedges[e]
        off = level * n
        for x, y in _JOINS[TerminalPartition(state)]:
            dsu.union(tri[x] + off, tri[y] + off)
    return dsu


def partition_connectivity(h: Hypergraph3, cfg, s: int, t: int) -> bool:
    """Whether vertex instances ``s`` and ``t`` are joined under ``cfg`` (posts open)."""
    dsu = _bunkbed_dsu(h, cfg)
    return dsu.find(s) == dsu.find(t)


def alt_bunkbed_probs(h: Hypergraph3, s: int, t: int, cap: int = 30) -> tuple[Fraction, Fraction]:
    """``(P[s0 <-> t0], P[s0 <-> t1])`` in the alternative model."""
    m = len(h.hyperedges)
    if m > cap:
        raise EnumerationCapExceeded(f"{m} hyperedges exceed the cap of {cap}")
    if s == t:
        return Fraction(1), Fraction(1)
    n = h.vertex_count
    same = cross = 0
    on, off = TerminalPartition.ABC, TerminalPartition.A_B_C
    for coins in itertools.product((0, 1), repeat=m):
        cfg = []
        for coin in coins:
            cfg += [on, off] if coin == 0 else [off, on]
        dsu = _bunkbed_dsu(h, cfg)
        root = dsu.find(s)
        same += root == dsu.find(t)
        cross += root == dsu.find(t + n)
    return Fraction(same, 2 ** m), Fraction(cross, 2 ** m)


# --------------------------------------------------------------------------
# count tables: kernel-independent structure of the WZ model


@dataclass(frozen=True)
class WzCountTable:
    """Configurations grouped by state count vector ``(c_abc, ..., c_a|b|c)``.

    ``same[cv]`` counts configurations with that count vector in which
    ``s0 <-> t0``; ``cross[cv]`` those with ``s0 <-> t1``.  The probability
    of either event under a kernel ``k`` is ``sum count * prod k_i ** c_i``.
    """

    instances: int
    same: dict
    cross: dict
    work: int
    method: str


def _check_endpoints(h: Hypergraph3, s: int, t: int) -> None:
    for x in (s, t):
        if not 0 <= x < h.vertex_count:
            raise ValueError(f"vertex {x} outside the hypergraph")


@functools.lru_cache(maxsize=32)
def wz_count_table(h: Hypergraph3, s: int, t: int, method: str = "split", workers=None) -> WzCountTable:
    """Tabulate the WZ model on the bunkbed hypergraph of ``h``.

    ``odometer`` enumerates all ``5 ** (2 |H|)`` configurations in the
    kernel backend.  ``split`` enumerates the ``5 ** |H|`` configurations
    of one level, keeps only the partition they induce on the poles and
    transversal vertices, and joins the two (independent) levels through
    the posts.
    """
    _check_endpoints(h, s, t)
    if method == "odometer":
        return _table_odometer(h, s, t, workers)
    if method == "split":
        return _table_split(h, s, t)
    raise ValueError(f"unknown method {method!r}")


def _table_odometer(h: Hypergraph3, s: int, t: int, workers=None) -> WzCountTable:
    m = len(h.hyperedges)
    if m > ODOMETER_CAP:
        raise EnumerationCapExceeded(f"{m} hyperedges exceed the odometer cap of {ODOMETER_CAP}")
    n = h.vertex_count
    dsu = _DSU(2 * n)
    for w in sorted(h.transversal):
        dsu.union(w, w + n)
    base = [dsu.find(x) for x in range(2 * n)]
    inst = []
    for a, b, c in h.hyperedges:
        for level in (0, 1):
            off = level * n
            inst.append((a + off, b + off, c + off))
    counts = kernels.wz_odometer(2 * n, base, inst, s, t, t + n, workers=workers)
    R = 2 * m + 1
    same, cross = {}, {}
    for idx in np.flatnonzero(counts.sum(axis=0)):
        cv, rest = [], int(idx)
        for _ in range(5):
            rest, d = divmod(rest, R)
            cv.append(d)
        cv = tuple(cv)
        ns = int(counts[1, idx] + counts[3, idx])
        nc = int(counts[2, idx] + counts[3, idx])
        if ns:
            same[cv] = ns
        if nc:
            cross[cv] = nc
    return WzCountTable(2 * m, same, cross, 5 ** (2 * m), "odometer")


def _level_table(h: Hypergraph3, keys: list[int]) -> dict:
    """Partition of ``keys`` (as a restricted growth tuple) -> {count vector: n}."""
    table: dict = defaultdict(lambda: defaultdict(int))
    n = h.vertex_count
    for states in itertools.product(range(5), repeat=len(h.hyperedges)):
        dsu = _DSU(n)
        cv = [0] * 5
        for tri, st in zip(h.hyperedges, states):
            cv[st] += 1
            for x, y in _JOINS[st]:
                dsu.union(tri[x], tri[y])
        seen: dict = {}
        rgs = tuple(seen.setdefault(dsu.find(k), len(seen)) for k in keys)
        table[rgs][tuple(cv)] += 1
    return table


def _poly_add(acc: dict, poly: dict) -> None:
    for k, v in poly.items():
        acc[k] += v


def _poly_mul(a: dict, b: dict) -> dict:
    out: dict = defaultdict(int)
    for ka, va in a.items():
        for kb, vb in b.items():
            out[tuple(x + y for x, y in zip(ka, kb))] += va * vb
    return out


def _table_split(h: Hypergraph3, s: int, t: int) -> WzCountTable:
    m = len(h.hyperedges)
    if m > SPLIT_CAP:
        raise EnumerationCapExceeded(f"{m} hyperedges exceed the split cap of {SPLIT_CAP}")
    tset = sorted(h.transversal)
    keys = [s, t] + tset
    level = _level_table(h, keys)
    r = len(keys)
    same: dict = defaultdict(int)
    cross: dict = defaultdict(int)
    for p0, poly0 in level.items():
        acc_same: dict = defaultdict(int)
        acc_cross: dict = defaultdict(int)
        for p1, poly1 in level.items():
            dsu = _DSU(2 * r)
            for i in range(2, r):
                dsu.union(p0[i], r + p1[i])
            root = dsu.find(p0[0])
            if root == dsu.find(p0[1]):
                _poly_add(acc_same, poly1)
            if root == dsu.find(r + p1[1]):
                _poly_add(acc_cross, poly1)
        _poly_add(same, _poly_mul(poly0, acc_same))
        _poly_add(cross, _poly_mul(poly0, acc_cross))
    clean = lambda d: {k: v for k, v in sorted(d.items()) if v}  # noqa: E731
    return WzCountTable(2 * m, clean(same), clean(cross), 2 * 5 ** m, "split")


# --------------------------------------------------------------------------
# evaluation


def evaluate_exact(poly: dict, k: HyperedgeKernel, degree: int) -> Fraction:
    vals = k.as_tuple()
    den = lcm(*(v.denominator for v in vals))
    nums = [v.numerator * (den // v.denominator) for v in vals]
    powers = [[x ** j for j in range(degree + 1)] for x in nums]
    total = 0
    for cv, count in poly.items():
        term = count
        for i, c in enumerate(cv):
            if c:
                term *= powers[i][c]
        total += term
    return Fraction(total, den ** degree)


def evaluate_interval(poly: dict, k: HyperedgeKernel, degree: int, bits: int) -> CertifiedNumber:
    """Outward-rounded evaluation; all terms are non-negative."""
    bounds = [enclose(v, bits) for v in k.as_tuple()]
    with down(bits):
        lo_pow = [[lo ** j for j in range(degree + 1)] for lo, _ in bounds]
        lo_sum = mpfr(0)
        for cv, count in poly.items():
            term = mpfr(count)
            for i, c in enumerate(cv):
                if c:
                    term *= lo_pow[i][c]
            lo_sum += term
    with up(bits):
        hi_pow = [[hi ** j for j in range(degree + 1)] for _, hi in bounds]
        hi_sum = mpfr(0)
        for cv, count in poly.items():
            term = mpfr(count)
            for i, c in enumerate(cv):
                if c:
                    term *= hi_pow[i][c]
            hi_sum += term
    return CertifiedNumber.interval(lo_sum, hi_sum, bits)


def wz_bunkbed_probs(h: Hypergraph3, k: HyperedgeKernel, s: int, t: int, mode: str = "exact",
                     bits: int = 256, method: str = "split", workers=None):
    """``(P[s0 <-> t0], P[s0 <-> t1])`` in the WZ model with kernel ``k``.

    ``mode`` is ``"exact"`` (rationals) or ``"interval"`` (``bits``-bit
    outward rounding).  Returns two :class:`CertifiedNumber` values.
    """
    table = wz_count_table(h, s, t, method, workers)
    if mode == "exact":
        return (CertifiedNumber.of(evaluate_exact(table.same, k, table.instances)),
                CertifiedNumber.of(evaluate_exact(table.cross, k, table.instances)))
    if mode == "interval":
        if bits < 2:
            raise ValueError("interval precision must be at least 2 bits")
        return (evaluate_interval(table.same, k, table.instances, bits),
                evaluate_interval(table.cross, k, table.instances, bits))
    raise ValueError(f"unknown mode {mode!r}")


def wz_bunkbed_probs_naive(h: Hypergraph3, k: HyperedgeKernel, s: int, t: int) -> tuple[Fraction, Fraction]:
    """Per-configuration products without count-vector grouping (small ``h`` only)."""
    m = len(h.hyperedges)
    if m > 4:
        raise EnumerationCapExceeded("naive WZ enumeration is limited to 4 hyperedges")
    n = h.vertex_count
    vals = k.as_tuple()
    same = cross = Fraction(0)
    for cfg in itertools.product(range(5), repeat=2 * m):
        weight = Fraction(1)
        for st in cfg:
            weight *= vals[st]
        if not weight:
            continue
        dsu = _bunkbed_dsu(h, cfg)
        root = dsu.find(s)
        if root == dsu.find(t):
            same += weight
        if root == dsu.find(t + n):
            cross += weight
    return same, cross


# --------------------------------------------------------------------------
# admissible kernel checks


@dataclass(frozen=True)
class AdmissibleKernelReport:
    kernel: HyperedgeKernel
    p_same: CertifiedNumber
    p_cross: CertifiedNumber
    gap: CertifiedNumber
    bits: int | None


def certified_gap(h, k, s, t, bits=256, max_bits=1 << 17, method="split"):
    """Interval evaluation, doubling precision until the gap sign is certified.

    Falls back to exact rationals past ``max_bits``.
    """
    while bits <= max_bits:
        same, cross = wz_bunkbed_probs(h, k, s, t, "interval", bits, method)
        gap = same - cross
        if gap.sign() is not None:
            return same, cross, gap, bits
        bits *= 2
    same, cross = wz_bunkbed_probs(h, k, s, t, "exact", method=method)
    return same, cross, same - cross, None


def verify_robust_lemma(k: HyperedgeKernel, bits: int = 256, max_bits: int = 1 << 17) -> AdmissibleKernelReport:
    """Check that ``k`` yields a strictly negative gap on Hollom's hypergraph."""
    if not check_eq390(k):
        raise ValueError("kernel does not satisfy 400 p_a|bc <= p_abc p_a|b|c - p_ab|c^2")
    h = build_hollom()
    s, t = HOLLOM_POLES
    same, cross, gap, used = certified_gap(h, k, s, t, bits, max_bits)
    if gap.sign() != -1:
        raise AdmissibleKernelViolation(
            f"kernel {k.as_tuple()} passes the threshold test but the gap is {gap} (sign {gap.sign()})"
        )
    return AdmissibleKernelReport(k, same, cross, gap, used)


def sample_kernel_satisfying_390(seed: int, max_attempts: int = 10_000) -> HyperedgeKernel:
    """Deterministic rational kernel with ``p_ab|c == p_ac|b`` that passes the threshold test."""
    rng = np.random.Generator(np.random.PCG64(seed))
    scale = 10 ** 6
    for _ in range(max_attempts):
        abc, pair, none = (Fraction(int(x), scale) for x in rng.integers(1, scale, size=3, endpoint=True))
        total = abc + 2 * pair + none
        abc, pair, none = abc / total, pair / total, none / total
        slack = abc * none - pair * pair
        if slack <= 0:
            continue
        eps = Fraction(int(rng.integers(0, scale, endpoint=True)), scale) * slack / 800
        k = HyperedgeKernel(abc / (1 + eps), pair / (1 + eps), pair / (1 + eps), eps / (1 + eps),
                            none / (1 + eps))
        if check_eq390(k):
            return k
    raise RuntimeError(f"no admissible kernel after {max_attempts} attempts (seed {seed})")
