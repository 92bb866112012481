"""Exact connection probabilities by edge-subset enumeration, and the
closed forms for the fan gadget ``G_n``.

Enumeration groups edges into probability classes.  The kernel counts
subsets by (which query pairs are connected, how many edges of each class
are open); the probability is then one integer polynomial evaluation, so
bignum work is proportional to the number of class vectors rather than to
``2**m``.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from math import comb

import numpy as np

from . import kernels
from .graphs import WeightedGraph, as_fraction, build_gadget

DEFAULT_CAP = 26
MAX_CLASS_VECTORS = 1 << 24


class EnumerationCapExceeded(ValueError):
    """Raised when exact enumeration would exceed the configured size cap."""


class TerminalPartition(enum.IntEnum):
    """The five ways to split terminals {a, b, c} into connected classes."""

    ABC = 0
    AB_C = 1
    AC_B = 2
    A_BC = 3
    A_B_C = 4

    @property
    def field(self) -> str:
        return _FIELDS[self]


_FIELDS = ("p_abc", "p_ab_c", "p_ac_b", "p_a_bc", "p_a_b_c")


@dataclass(frozen=True)
class HyperedgeKernel:
    """Distribution of the partition a random gadget induces on its terminals."""

    p_abc: Fraction
    p_ab_c: Fraction
    p_ac_b: Fraction
    p_a_bc: Fraction
    p_a_b_c: Fraction

    def __post_init__(self):
        vals = []
        for name in _FIELDS:
            v = as_fraction(getattr(self, name))
            if not 0 <= v <= 1:
                raise ValueError(f"{name} = {v} outside [0, 1]")
            object.__setattr__(self, name, v)
            vals.append(v)
        if sum(vals) != 1:
            raise ValueError(f"kernel probabilities sum to {sum(vals)}, not 1")

    @classmethod
    def from_values(cls, values) -> HyperedgeKernel:
        return cls(*values)

    def as_tuple(self) -> tuple[Fraction, ...]:
        return tuple(getattr(self, name) for name in _FIELDS)

    def __getitem__(self, part: TerminalPartition) -> Fraction:
        return getattr(self, _FIELDS[TerminalPartition(part)])

    def swap_bc(self) -> HyperedgeKernel:
        return HyperedgeKernel(self.p_abc, self.p_ac_b, self.p_ab_c, self.p_a_bc, self.p_a_b_c)


# --------------------------------------------------------------------------
# enumeration plumbing


@dataclass
class Prepared:
    """Graph after deleting closed edges and contracting always-open ones."""

    vertex_count: int
    us: list[int]
    vs: list[int]
    edge_class: list[int]
    classes: list[Fraction]
    class_sizes: list[int]
    vertex_map: list[int]

    @property
    def strides(self) -> list[int]:
        out, acc = [], 1
        strides_by_class = []
        for size in self.class_sizes:
            strides_by_class.append(acc)
            acc *= size + 1
        for c in self.edge_class:
            out.append(strides_by_class[c])
        return out

    @property
    def class_vector_count(self) -> int:
        total = 1
        for size in self.class_sizes:
            total *= size + 1
        return total

    def decode(self, idx: int) -> list[int]:
        ks = []
        for size in self.class_sizes:
            idx, k = divmod(idx, size + 1)
            ks.append(k)
        return ks


def prepare(g: WeightedGraph, contract: bool = True, classes: list[int] | None = None) -> Prepared:
    """Normalize ``g`` for enumeration.

    With ``contract`` set, edges open with probability 1 are contracted and
    edges with probability 0 or that became loops are dropped.  ``classes``
    optionally forces a class id per edge (used by the polynomial builders
    where the class is a variable rather than a value).
    """
    n = g.vertex_count
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    if contract and classes is None:
        for u, v, p in g.edges:
            if p == 1:
                parent[find(u)] = find(v)
    roots = sorted({find(x) for x in range(n)})
    compact = {r: i for i, r in enumerate(roots)}
    vmap = [compact[find(x)] for x in range(n)]

    us, vs, eclass = [], [], []
    values: list[Fraction] = []
    sizes: list[int] = []
    key_to_class: dict = {}
    for i, (u, v, p) in enumerate(g.edges):
        a, b = vmap[u], vmap[v]
        if classes is None and contract and (p == 0 or p == 1 or a == b):
            continue
        key = classes[i] if classes is not None else p
        if key not in key_to_class:
            key_to_class[key] = len(values)
            values.append(p)
            sizes.append(0)
        cid = key_to_class[key]
        sizes[cid] += 1
        us.append(a)
        vs.append(b)
        eclass.append(cid)
    return Prepared(len(roots), us, vs, eclass, values, sizes, vmap)


def check_cap(m: int, cap: int) -> None:
    if m > cap:
        raise EnumerationCapExceeded(
            f"{m} random edges exceed the enumeration cap of {cap}; "
            "use Monte Carlo or a kernel reduction instead"
        )


def outcome_counts(prep: Prepared, queries, workers=None) -> np.ndarray:
    ncv = prep.class_vector_count
    if ncv > MAX_CLASS_VECTORS:
        raise EnumerationCapExceeded(f"{ncv} probability-class vectors exceed {MAX_CLASS_VECTORS}")
    mapped = [(prep.vertex_map[x], prep.vertex_map[y]) for x, y in queries]
    return kernels.subset_outcomes(prep.vertex_count, prep.us, prep.vs, prep.strides, mapped, ncv,
                                   workers=workers)


def weigh(prep: Prepared, row: np.ndarray) -> Fraction:
    """Exact probability mass of the subsets tallied in ``row``."""
    nums, gaps, dens = [], [], []
    for p, size in zip(prep.classes, prep.class_sizes):
        a, d = p.numerator, p.denominator
        nums.append([a ** k for k in range(size + 1)])
        gaps.append([(d - a) ** k for k in range(size + 1)])
        dens.append(d ** size)
    total = 0
    for idx in np.flatnonzero(row):
        ks = prep.decode(int(idx))
        term = int(row[idx])
        for c, k in enumerate(ks):
            term *= nums[c][k] * gaps[c][prep.class_sizes[c] - k]
        total += term
    den = 1
    for d in dens:
        den *= d
    return Fraction(total, den)


def _mass(prep: Prepared, counts: np.ndarray, codes) -> Fraction:
    row = np.zeros(counts.shape[1], dtype=np.int64)
    for code in codes:
        row += counts[code]
    return weigh(prep, row)


# --------------------------------------------------------------------------
# public operations


def connect_prob_exact(g: WeightedGraph, u: int, v: int, cap: int = DEFAULT_CAP,
                       contract: bool = True, workers=None) -> Fraction:
    """P[u <-> v] summed over all open-edge subsets of ``g``."""
    prep = prepare(g, contract=contract)
    if prep.vertex_map[u] == prep.vertex_map[v]:
        return Fraction(1)
    check_cap(len(prep.us), cap)
    counts = outcome_counts(prep, [(u, v)], workers)
    return _mass(prep, counts, [1])


def terminal_kernel_exact(g: WeightedGraph, a: int, b: int, c: int, cap: int = DEFAULT_CAP,
                          workers=None) -> HyperedgeKernel:
    if len({a, b, c}) != 3:
        raise ValueError("terminals must be distinct")
    prep = prepare(g)
    check_cap(len(prep.us), cap)
    counts = outcome_counts(prep, [(a, b), (a, c), (b, c)], workers)
    # bit0: a-b, bit1: a-c, bit2: b-c
    return HyperedgeKernel(
        _mass(prep, counts, [7]),
        _mass(prep, counts, [1]),
        _mass(prep, counts, [2]),
        _mass(prep, counts, [4]),
        _mass(prep, counts, [0]),
    )


def _prob(p) -> Fraction:
    p = as_fraction(p)
    if not 0 <= p <= 1:
        raise ValueError(f"probability {p} outside [0, 1]")
    return p


def gadget_marginal_closed(n: int, p) -> Fraction:
    """P(a <-> v_n) in ``G_n``; equals P(a <-> v_1) by reflection."""
    if n < 0:
        raise ValueError("n must be >= 0")
    p = _prob(p)
    return (1 - p ** (2 * n)) / (1 + p)


def gadget_marginal_recurrence(n: int, p) -> Fraction:
    p = _prob(p)
    val = Fraction(0)
    for _ in range(n):
        val = (1 - p) + p * p * val
    return val


def gadget_three_closed(n: int, p) -> Fraction:
    """P(a <-> v_1 <-> v_n) in ``G_n``."""
    if n < 0:
        raise ValueError("n must be >= 0")
    p = _prob(p)
    if n == 0:
        return Fraction(0)
    return (1 - p ** (2 * n)) / (1 + p) ** 2 + n * (1 - p) * p ** (2 * n - 1) / (1 + p)


def gadget_three_recurrence(n: int, p) -> Fraction:
    p = _prob(p)
    prev, cur = Fraction(0), 1 - p
    if n == 0:
        return prev
    for _ in range(n - 1):
        prev, cur = cur, (1 - p) ** 2 + 2 * p * p * cur - p ** 4 * prev
    return cur


def gadget_bc_only_closed(n: int, p) -> Fraction:
    """P(a not connected to v_1, v_1 <-> v_n) = p^(2n-1)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return _prob(p) ** (2 * n - 1)


def gadget_kernel_closed(n: int, p) -> HyperedgeKernel:
    if n < 2:
        raise ValueError("gadget kernel needs n >= 2")
    p = _prob(p)
    abc = gadget_three_closed(n, p)
    pair = gadget_marginal_closed(n, p) - abc
    bc = gadget_bc_only_closed(n, p)
    return HyperedgeKernel(abc, pair, pair, bc, 1 - abc - 2 * pair - bc)


def gadget_kernel_bruteforce(n: int, p, cap: int = DEFAULT_CAP) -> HyperedgeKernel:
    h = build_gadget(n, p)
    return terminal_kernel_exact(h.graph, h.terminal_a, h.terminal_b, h.terminal_c, cap=cap)


def hk_slack(k: HyperedgeKernel) -> Fraction:
    """``p_abc * p_a|b|c - p_ab|c ** 2``, the right side of the kernel threshold test."""
    return k.p_abc * k.p_a_b_c - k.p_ab_c ** 2


def check_eq390(k: HyperedgeKernel) -> bool:
    """``400 * p_a|bc <= p_abc * p_a|b|c - p_ab|c ** 2`` (exact).

    The model assumes ``p_ab|c == p_ac|b``; the square uses ``p_ab|c``.
    """
    return 400 * k.p_a_bc <= hk_slack(k)


def check_hk(k: HyperedgeKernel) -> bool:
    return k.p_ab_c * k.p_ac_b <= k.p_abc * k.p_a_b_c


def kernel_gap_lower_bound(n: int, p) -> Fraction:
    """``(n (1-p)/(1+p) - 1) p^(2n-1)``, checked against the actual kernel."""
    if n < 2:
        raise ValueError("n must be >= 2")
    p = as_fraction(p)
    if not 0 < p < 1:
        raise ValueError("p must lie strictly between 0 and 1")
    bound = (n * (1 - p) / (1 + p) - 1) * p ** (2 * n - 1)
    k = gadget_kernel_closed(n, p)
    actual = k.p_abc * k.p_a_b_c - k.p_ab_c * k.p_ac_b
    if actual < bound:
        raise AssertionError(f"kernel slack {actual} below the closed-form bound {bound}")
    return bound


def bernstein_to_monomial(counts: dict[int, int], m: int) -> list[int]:
    """Expand ``sum_k c_k p^k (1-p)^(m-k)`` into monomial coefficients."""
    coeffs = [0] * (m + 1)
    for k, c in counts.items():
        if not c:
            continue
        for j in range(m - k + 1):
            coeffs[k + j] += c * comb(m - k, j) * (-1) ** j
    return coeffs
