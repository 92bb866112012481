"""Pure-Python (numpy-vectorised) twins of the kernels in ``_core.pyx``.

Connectivity is computed by min-label propagation over a block of
realizations at once: every open edge pulls both endpoint labels down to
their minimum until nothing changes, which leaves each component labelled
by its smallest vertex.
"""
from __future__ import annotations

import numpy as np

_BLOCK = 1 << 15


def _labels(nv: int, us, vs, open_mask: np.ndarray, base=None) -> np.ndarray:
    rows = open_mask.shape[0]
    lab = np.tile(np.arange(nv, dtype=np.int32), (rows, 1))
    if rows == 0:
        return lab
    edges = [(int(u), int(v), open_mask[:, e].astype(bool)) for e, (u, v) in enumerate(zip(us, vs))]
    if base is not None:
        always = np.ones(rows, dtype=bool)
        edges += [(i, int(r), always) for i, r in enumerate(base) if int(r) != i]
    while True:
        changed = False
        for u, v, on in edges:
            lu = lab[:, u]
            lv = lab[:, v]
            diff = on & (lu != lv)
            if diff.any():
                low = np.minimum(lu, lv)
                lab[diff, u] = low[diff]
                lab[diff, v] = low[diff]
                changed = True
        if not changed:
            return lab


def _mask_bits(masks: np.ndarray, m: int) -> np.ndarray:
    shifts = np.arange(m, dtype=np.uint64)
    return ((masks[:, None] >> shifts) & np.uint64(1)).astype(np.uint8)


def subset_outcomes(nv, us, vs, strides, queries, ncv, start, stop):
    q = len(queries)
    counts = np.zeros((1 << q, ncv), dtype=np.int64)
    strides = np.asarray(strides, dtype=np.int64)
    for lo in range(start, stop, _BLOCK):
        masks = np.arange(lo, min(stop, lo + _BLOCK), dtype=np.uint64)
        bits = _mask_bits(masks, len(us))
        lab = _labels(nv, us, vs, bits)
        idx = bits.astype(np.int64) @ strides if len(us) else np.zeros(len(masks), dtype=np.int64)
        code = np.zeros(len(masks), dtype=np.int64)
        for j, (x, y) in enumerate(queries):
            code |= (lab[:, x] == lab[:, y]).astype(np.int64) << j
        np.add.at(counts, (code, idx), 1)
    return counts


def subset_partitions(nv, us, vs, strides, keys, start, stop):
    codes = np.zeros(stop - start, dtype=np.uint64)
    cvs = np.zeros(stop - start, dtype=np.int64)
    strides = np.asarray(strides, dtype=np.int64)
    keys = [int(k) for k in keys]
    for lo in range(start, stop, _BLOCK):
        hi = min(stop, lo + _BLOCK)
        masks = np.arange(lo, hi, dtype=np.uint64)
        bits = _mask_bits(masks, len(us))
        lab = _labels(nv, us, vs, bits)[:, keys] if keys else np.zeros((hi - lo, 0), dtype=np.int32)
        code = np.zeros(hi - lo, dtype=np.uint64)
        rgs = np.full((hi - lo, len(keys)), -1, dtype=np.int64)
        nxt = np.zeros(hi - lo, dtype=np.int64)
        for i in range(len(keys)):
            for j in range(i):
                hit = (rgs[:, i] < 0) & (lab[:, j] == lab[:, i])
                rgs[hit, i] = rgs[hit, j]
            fresh = rgs[:, i] < 0
            rgs[fresh, i] = nxt[fresh]
            nxt[fresh] += 1
            code |= rgs[:, i].astype(np.uint64) << np.uint64(4 * i)
        codes[lo - start:hi - start] = code
        cvs[lo - start:hi - start] = bits.astype(np.int64) @ strides if len(us) else 0
    return codes, cvs


# state -> which of (a-b, a-c, b-c) are joined
_STATE_PAIRS = np.array(
    [[1, 1, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1], [0, 0, 0]],
    dtype=np.uint8,
)


def wz_odometer(nv, base_parent, inst, s, t0, t1, start, stop):
    ni = len(inst)
    R = ni + 1
    counts = np.zeros((4, R ** 5), dtype=np.int64)
    us, vs = [], []
    for a, b, c in inst:
        us += [a, a, b]
        vs += [b, c, c]
    pow5 = np.array([5 ** i for i in range(ni)], dtype=np.int64)
    powR = np.array([R ** k for k in range(5)], dtype=np.int64)
    for lo in range(start, stop, _BLOCK):
        cfg = np.arange(lo, min(stop, lo + _BLOCK), dtype=np.int64)
        digits = (cfg[:, None] // pow5) % 5
        open_mask = _STATE_PAIRS[digits].reshape(len(cfg), 3 * ni)
        lab = _labels(nv, us, vs, open_mask, base=base_parent)
        code = (lab[:, s] == lab[:, t0]).astype(np.int64) | ((lab[:, s] == lab[:, t1]).astype(np.int64) << 1)
        idx = powR[digits].sum(axis=1)
        np.add.at(counts, (code, idx), 1)
    return counts


def sample_connectivity(nv, base_parent, us, vs, open_mask, s, t0, t1):
    counts = np.zeros(4, dtype=np.int64)
    for lo in range(0, open_mask.shape[0], _BLOCK):
        lab = _labels(nv, us, vs, open_mask[lo:lo + _BLOCK], base=base_parent)
        code = (lab[:, s] == lab[:, t0]).astype(np.int64) | ((lab[:, s] == lab[:, t1]).astype(np.int64) << 1)
        counts += np.bincount(code, minlength=4)
    return counts
