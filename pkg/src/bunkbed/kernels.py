"""Backend selection for the enumeration kernels.

The compiled ``_core`` extension is used when importable; otherwise the
numpy fallback.  ``BUNKBED_PURE_PYTHON=1`` forces the fallback.
``BUNKBED_WORKERS`` sets the default worker count for range-split runs.
"""
from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import _fallback

_core = None
if not os.environ.get("BUNKBED_PURE_PYTHON"):
    try:
        from . import _core
    except ImportError:  # pragma: no cover - depends on the build
        _core = None

BACKEND = "compiled" if _core is not None else "python"
_impl = _core if _core is not None else _fallback


def backend_module(name: str | None = None):
    if name is None:
        return _impl
    if name == "python":
        return _fallback
    if name == "compiled":
        if _core is None:
            raise RuntimeError("compiled core is not available")
        return _core
    raise ValueError(f"unknown backend {name!r}")


def default_workers() -> int:
    try:
        return max(1, int(os.environ.get("BUNKBED_WORKERS", "1")))
    except ValueError:
        return 1


def _i32(x):
    return np.ascontiguousarray(np.asarray(x, dtype=np.int32))


def _i64(x):
    return np.ascontiguousarray(np.asarray(x, dtype=np.int64))


def _split(total: int, workers: int) -> list[tuple[int, int]]:
    workers = max(1, min(workers, total or 1))
    step = -(-total // workers)
    return [(lo, min(total, lo + step)) for lo in range(0, total, step)] or [(0, 0)]


def _run(name: str, backend: str | None, args: tuple, lo: int, hi: int):
    return getattr(backend_module(backend), name)(*args, lo, hi)


def _ranged(name, args, total, workers, backend):
    """Run a range kernel over ``[0, total)``, split across processes, and sum."""
    workers = default_workers() if workers is None else workers
    ranges = _split(total, workers)
    if len(ranges) == 1:
        return _run(name, backend, args, *ranges[0])
    with ProcessPoolExecutor(len(ranges)) as pool:
        parts = list(pool.map(_run, [name] * len(ranges), [backend] * len(ranges),
                              [args] * len(ranges), *zip(*ranges)))
    return sum(parts[1:], parts[0])


def subset_outcomes(nv, us, vs, strides, queries, ncv, *, workers=None, backend=None) -> np.ndarray:
    m = len(us)
    if m > 62:
        raise ValueError("too many edges for bitmask enumeration")
    q = np.asarray(queries, dtype=np.int32).reshape(-1, 2)
    args = (int(nv), _i32(us), _i32(vs), _i64(strides), np.ascontiguousarray(q), int(ncv))
    return _ranged("subset_outcomes", args, 1 << m, workers, backend)


def subset_partitions(nv, us, vs, strides, keys, *, backend=None):
    m = len(us)
    if len(keys) > 16:
        raise ValueError("at most 16 key vertices")
    return backend_module(backend).subset_partitions(
        int(nv), _i32(us), _i32(vs), _i64(strides), _i32(keys), 0, 1 << m
    )


def wz_odometer(nv, base_parent, inst, s, t0, t1, *, workers=None, backend=None) -> np.ndarray:
    inst = np.ascontiguousarray(np.asarray(inst, dtype=np.int32).reshape(-1, 3))
    args = (int(nv), _i32(base_parent), inst, int(s), int(t0), int(t1))
    return _ranged("wz_odometer", args, 5 ** len(inst), workers, backend)


def sample_connectivity(nv, base_parent, us, vs, open_mask, s, t0, t1, *, backend=None) -> np.ndarray:
    mask = np.ascontiguousarray(np.asarray(open_mask, dtype=np.uint8))
    if mask.ndim != 2:
        mask = mask.reshape(mask.shape[0], len(us))
    return backend_module(backend).sample_connectivity(
        int(nv), _i32(base_parent), _i32(us), _i32(vs), mask, int(s), int(t0), int(t1)
    )
