# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled enumeration kernels.

Every function here has a line-for-line twin in ``_fallback.py`` with the
same signature and the same output; ``kernels.py`` picks one at import.
"""
import numpy as np

cimport numpy as cnp
from libc.stdint cimport int32_t, int64_t, uint8_t, uint64_t
from libc.stdlib cimport free, malloc

cnp.import_array()


cdef inline int32_t _find(int32_t* parent, int32_t x) noexcept nogil:
    while parent[x] != x:
        parent[x] = parent[parent[x]]
        x = parent[x]
    return x


cdef inline void _union(int32_t* parent, int32_t x, int32_t y) noexcept nogil:
    x = _find(parent, x)
    y = _find(parent, y)
    if x != y:
        parent[x] = y


def subset_outcomes(int nv, const int32_t[:] us, const int32_t[:] vs, const int64_t[:] strides,
                    const int32_t[:, :] queries, int64_t ncv, uint64_t start, uint64_t stop):
    """Count edge subsets in ``[start, stop)`` by (query bitmask, class vector index)."""
    cdef int m = us.shape[0]
    cdef int q = queries.shape[0]
    counts = np.zeros((1 << q, ncv), dtype=np.int64)
    cdef int64_t[:, :] c = counts
    cdef int32_t* parent = <int32_t*> malloc(max(nv, 1) * sizeof(int32_t))
    if parent == NULL:
        raise MemoryError()
    cdef uint64_t mask
    cdef int e, i, j, code
    cdef int64_t idx
    try:
        with nogil:
            mask = start
            while mask < stop:
                for i in range(nv):
                    parent[i] = i
                idx = 0
                for e in range(m):
                    if (mask >> e) & 1:
                        idx += strides[e]
                        _union(parent, us[e], vs[e])
                code = 0
                for j in range(q):
                    if _find(parent, queries[j, 0]) == _find(parent, queries[j, 1]):
                        code |= 1 << j
                c[code, idx] += 1
                mask += 1
    finally:
        free(parent)
    return counts


def subset_partitions(int nv, const int32_t[:] us, const int32_t[:] vs, const int64_t[:] strides,
                      const int32_t[:] keys, uint64_t start, uint64_t stop):
    """Per subset: canonical partition code of the key vertices and class vector index.

    Key ``i`` gets the label of the first key in its component (restricted
    growth string), packed 4 bits per key.
    """
    cdef int m = us.shape[0]
    cdef int r = keys.shape[0]
    cdef Py_ssize_t total = stop - start
    codes = np.zeros(total, dtype=np.uint64)
    cvs = np.zeros(total, dtype=np.int64)
    cdef uint64_t[:] oc = codes
    cdef int64_t[:] ov = cvs
    cdef int32_t* parent = <int32_t*> malloc(max(nv, 1) * sizeof(int32_t))
    cdef int32_t* roots = <int32_t*> malloc(max(r, 1) * sizeof(int32_t))
    cdef int32_t* lab = <int32_t*> malloc(max(r, 1) * sizeof(int32_t))
    if parent == NULL or roots == NULL or lab == NULL:
        free(parent); free(roots); free(lab)
        raise MemoryError()
    cdef uint64_t mask, code
    cdef Py_ssize_t pos
    cdef int e, i, j, nxt
    cdef int64_t idx
    try:
        with nogil:
            for pos in range(total):
                mask = start + pos
                for i in range(nv):
                    parent[i] = i
                idx = 0
                for e in range(m):
                    if (mask >> e) & 1:
                        idx += strides[e]
                        _union(parent, us[e], vs[e])
                nxt = 0
                code = 0
                for i in range(r):
                    roots[i] = _find(parent, keys[i])
                    lab[i] = -1
                    for j in range(i):
                        if roots[j] == roots[i]:
                            lab[i] = lab[j]
                            break
                    if lab[i] < 0:
                        lab[i] = nxt
                        nxt += 1
                    code |= (<uint64_t> lab[i]) << (4 * i)
                oc[pos] = code
                ov[pos] = idx
    finally:
        free(parent); free(roots); free(lab)
    return codes, cvs


def wz_odometer(int nv, const int32_t[:] base_parent, const int32_t[:, :] inst,
                int32_t s, int32_t t0, int32_t t1, uint64_t start, uint64_t stop):
    """Enumerate five-state configurations of the hyperedge instances.

    Configuration numbers are little-endian base-5 odometers over the rows
    of ``inst`` (row 0 is the fastest digit).  Counters are indexed by
    ``same | cross << 1`` and by the state count vector packed as
    ``sum(R ** state)`` with ``R = len(inst) + 1``.

    Union-find states are stacked per digit: layer ``i`` holds the merges
    of rows ``i..ni-1``, so a step that changes digits ``0..j`` rebuilds
    only layers ``j..0``.
    """
    cdef int ni = inst.shape[0]
    cdef int64_t R = ni + 1
    cdef int64_t size = R * R * R * R * R
    counts = np.zeros((4, size), dtype=np.int64)
    cdef int64_t[:, :] c = counts
    cdef int64_t powR[5]
    cdef int k
    powR[0] = 1
    for k in range(1, 5):
        powR[k] = powR[k - 1] * R
    cdef int32_t* stack = <int32_t*> malloc(max(nv, 1) * (ni + 1) * sizeof(int32_t))
    cdef int* digit = <int*> malloc(max(ni, 1) * sizeof(int))
    if stack == NULL or digit == NULL:
        free(stack); free(digit)
        raise MemoryError()
    cdef uint64_t cfg, rest
    cdef int64_t idx
    cdef int i, j, st, code, dirty
    cdef int32_t a, b, cc, rs
    cdef int32_t* layer
    cdef int32_t* above
    try:
        with nogil:
            for i in range(nv):
                stack[ni * nv + i] = base_parent[i]
            rest = start
            idx = 0
            for i in range(ni):
                digit[i] = <int> (rest % 5)
                rest //= 5
                idx += powR[digit[i]]
            dirty = ni - 1
            cfg = start
            while cfg < stop:
                j = dirty
                while j >= 0:
                    layer = stack + j * nv
                    above = stack + (j + 1) * nv
                    for i in range(nv):
                        layer[i] = above[i]
                    st = digit[j]
                    a = inst[j, 0]
                    b = inst[j, 1]
                    cc = inst[j, 2]
                    if st == 0:
                        _union(layer, a, b)
                        _union(layer, a, cc)
                    elif st == 1:
                        _union(layer, a, b)
                    elif st == 2:
                        _union(layer, a, cc)
                    elif st == 3:
                        _union(layer, b, cc)
                    j -= 1
                layer = stack
                rs = _find(layer, s)
                code = 0
                if rs == _find(layer, t0):
                    code = 1
                if rs == _find(layer, t1):
                    code |= 2
                c[code, idx] += 1
                cfg += 1
                # odometer step; remember the highest digit touched
                i = 0
                while i < ni:
                    idx -= powR[digit[i]]
                    if digit[i] < 4:
                        digit[i] += 1
                        idx += powR[digit[i]]
                        break
                    digit[i] = 0
                    idx += powR[0]
                    i += 1
                dirty = i if i < ni else ni - 1
    finally:
        free(stack); free(digit)
    return counts


def sample_connectivity(int nv, const int32_t[:] base_parent, const int32_t[:] us, const int32_t[:] vs,
                        const uint8_t[:, :] open_mask, int32_t s, int32_t t0, int32_t t1):
    """Tally paired indicators ``same | cross << 1`` over sampled edge realizations."""
    cdef Py_ssize_t nsamp = open_mask.shape[0]
    cdef int m = us.shape[0]
    counts = np.zeros(4, dtype=np.int64)
    cdef int64_t[:] c = counts
    cdef int32_t* parent = <int32_t*> malloc(max(nv, 1) * sizeof(int32_t))
    if parent == NULL:
        raise MemoryError()
    cdef Py_ssize_t k
    cdef int e, i, code
    cdef int32_t rs
    try:
        with nogil:
            for k in range(nsamp):
                for i in range(nv):
                    parent[i] = base_parent[i]
                for e in range(m):
                    if open_mask[k, e]:
                        _union(parent, us[e], vs[e])
                rs = _find(parent, s)
                code = 0
                if rs == _find(parent, t0):
                    code = 1
                if rs == _find(parent, t1):
                    code |= 2
                c[code] += 1
    finally:
        free(parent)
    return counts
