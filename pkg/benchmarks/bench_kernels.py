"""Time the compiled kernels against the numpy fallback on the same inputs.

    python benchmarks/bench_kernels.py [--repeat 3]

Both backends must produce identical arrays; the script stops otherwise.
"""
import argparse
import time
from fractions import Fraction

import numpy as np

from bunkbed import kernels
from bunkbed.analysis import _posts_contracted
from bunkbed.exact import prepare
from bunkbed.graphs import BunkbedInstance, WeightedGraph, build_gadget, build_hollom, substitute_gadgets


def _k5_bunkbed():
    pairs = [(i, j) for i in range(5) for j in range(i + 1, 5)]
    b = BunkbedInstance(WeightedGraph.uniform(5, pairs), frozenset({0}), 1, 2)
    g, u, v, v1 = _posts_contracted(b)
    return prepare(g), [(u, v), (u, v1)]


def cases():
    prep, queries = _k5_bunkbed()
    yield "subset_outcomes K5 bunkbed (2^20)", "subset_outcomes", (
        prep.vertex_count, prep.us, prep.vs, prep.strides, queries, prep.class_vector_count)

    gad = prepare(build_gadget(9, Fraction(1, 3)).graph)
    yield "subset_partitions gadget n=9 (2^17)", "subset_partitions", (
        gad.vertex_count, gad.us, gad.vs, gad.strides, [0, 1, 9])

    h = build_hollom()
    n = h.vertex_count
    inst = [(a + lvl * n, b + lvl * n, c + lvl * n) for a, b, c in h.hyperedges[:4] for lvl in (0, 1)]
    parent = list(range(2 * n))
    for w in h.transversal:
        parent[w + n] = w
    yield "wz_odometer 4 hyperedges (5^8)", "wz_odometer", (2 * n, parent, inst, 0, 9, 9 + n)

    inst_b = substitute_gadgets(h, 3, Fraction(1, 2))
    g, u, v, v1 = _posts_contracted(inst_b)
    rng = np.random.Generator(np.random.PCG64(0))
    mask = (rng.random((200_000, g.edge_count)) < 0.5).astype(np.uint8)
    yield "sample_connectivity Hollom n=3 (2e5 samples)", "sample_connectivity", (
        g.vertex_count, list(range(g.vertex_count)), [e.u for e in g.edges], [e.v for e in g.edges],
        mask, u, v, v1)


def timed(fn, args, repeat):
    best, out = float("inf"), None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()
    if kernels.BACKEND != "compiled":
        raise SystemExit("compiled core not built; run `pip install -e . --no-build-isolation` first")
    print(f"{'kernel':48s} {'compiled':>10s} {'python':>10s} {'speedup':>8s}")
    for title, name, call_args in cases():
        fast = getattr(kernels, name)
        t_c, out_c = timed(lambda *a: fast(*a, backend="compiled"), call_args, args.repeat)
        t_p, out_p = timed(lambda *a: fast(*a, backend="python"), call_args, args.repeat)
        pairs = zip(out_c, out_p) if isinstance(out_c, tuple) else [(out_c, out_p)]
        if not all(np.array_equal(x, y) for x, y in pairs):
            raise SystemExit(f"{title}: backends disagree")
        print(f"{title:48s} {t_c:9.3f}s {t_p:9.3f}s {t_p / t_c:7.1f}x")


if __name__ == "__main__":
    main()
