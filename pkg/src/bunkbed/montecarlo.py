"""Seeded Monte Carlo estimators for bunkbed gaps.

Both indicators are read off one union-find per sample, so the gap
estimate is a mean of paired differences in {-1, 0, 1}.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import kernels
from .analysis import _posts_contracted
from .exact import prepare
from .graphs import BunkbedInstance

RNG_NAME = f"numpy.PCG64 (numpy {np.__version__})"
MIN_BATCH = 1000
BATCH = 1 << 14
_TWO64 = 1 << 64


class StopDecision(str, enum.Enum):
    CONTINUE = "continue"
    STOP = "stop"


@dataclass(frozen=True)
class McEstimate:
    p_same_hat: float
    p_cross_hat: float
    gap_hat: float
    std_error: float
    samples: int
    seed: int
    early_stopped: bool = False
    rng: str = RNG_NAME

    @classmethod
    def from_counts(cls, counts, seed: int, early_stopped: bool = False) -> McEstimate:
        c = [int(x) for x in counts]
        n = sum(c)
        if n <= 0:
            raise ValueError("an estimate needs at least one sample")
        same_only, cross_only, both = c[1], c[2], c[3]
        mean = (same_only - cross_only) / n
        if n > 1:
            var = (same_only + cross_only - n * mean * mean) / (n - 1)
        else:
            var = 0.0
        return cls(
            p_same_hat=(same_only + both) / n,
            p_cross_hat=(cross_only + both) / n,
            gap_hat=mean,
            std_error=math.sqrt(max(var, 0.0) / n),
            samples=n,
            seed=seed,
            early_stopped=early_stopped,
        )

    def confidence_interval(self, z: float = 1.96) -> tuple[float, float]:
        return self.gap_hat - z * self.std_error, self.gap_hat + z * self.std_error

    def to_json(self) -> dict:
        return {
            "p_same_hat": self.p_same_hat,
            "p_cross_hat": self.p_cross_hat,
            "gap_hat": self.gap_hat,
            "std_error": self.std_error,
            "samples": self.samples,
            "seed": self.seed,
            "early_stopped": self.early_stopped,
            "rng": self.rng,
        }


def mc_early_stop_policy(current: McEstimate, threshold: float, min_batch: int = MIN_BATCH) -> StopDecision:
    """Stop once the gap estimate sits more than ``threshold`` standard errors from zero."""
    if current.samples < min_batch:
        return StopDecision.CONTINUE
    if abs(current.gap_hat) > threshold * current.std_error:
        return StopDecision.STOP
    return StopDecision.CONTINUE


def _streams(seed: int):
    if not 0 <= seed < _TWO64:
        raise ValueError("seed must be a 64-bit unsigned integer")
    main, ties = np.random.SeedSequence(seed).spawn(2)
    return np.random.PCG64(main), np.random.PCG64(ties)


def _resolve_tie(frac: Fraction, ties: np.random.PCG64) -> bool:
    """Decide ``U < frac`` for a fresh uniform ``U`` drawn 64 bits at a time."""
    while True:
        scaled = frac * _TWO64
        th = math.floor(scaled)
        x = int(ties.random_raw())
        if x != th:
            return x < th
        if scaled == th:
            return False
        frac = scaled - th


def _thresholds(probs):
    th = np.array([math.floor(q * _TWO64) for q in probs], dtype=np.uint64)
    rem = [q * _TWO64 - math.floor(q * _TWO64) for q in probs]
    return th, rem


def _run(n_samples, seed, draw, nv, base_parent, us, vs, s, t0, t1, early_stop, batch):
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    main, ties = _streams(seed)
    counts = np.zeros(4, dtype=np.int64)
    done = 0
    while done < n_samples:
        size = min(batch, n_samples - done)
        mask = draw(main, ties, size)
        counts += kernels.sample_connectivity(nv, base_parent, us, vs, mask, s, t0, t1)
        done += size
        if early_stop is not None and done < n_samples:
            est = McEstimate.from_counts(counts, seed)
            if mc_early_stop_policy(est, early_stop) is StopDecision.STOP:
                return McEstimate.from_counts(counts, seed, early_stopped=True)
    return McEstimate.from_counts(counts, seed)


def mc_gap_standard(b: BunkbedInstance, n_samples: int, seed: int, early_stop: float | None = None,
                    batch: int = BATCH) -> McEstimate:
    """Every level edge open independently with its own probability; posts always open.

    Edge ``e`` is open when a uniform 64-bit draw is below ``floor(q * 2**64)``;
    a draw equal to that value is settled exactly with extra draws from a
    separate stream.
    """
    g, u, v, v1 = _posts_contracted(b)
    prep = prepare(g)
    probs = [prep.classes[c] for c in prep.edge_class]
    th, rem = _thresholds(probs)
    m = len(probs)

    def draw(main, ties, size):
        raw = main.random_raw(size * m).reshape(size, m) if m else np.zeros((size, 0), np.uint64)
        mask = (raw < th).astype(np.uint8)
        for i, e in zip(*np.nonzero(raw == th)):
            if rem[e]:
                mask[i, e] = _resolve_tie(rem[e], ties)
        return mask

    vm = prep.vertex_map
    base_parent = list(range(prep.vertex_count))
    return _run(n_samples, seed, draw, prep.vertex_count, base_parent, prep.us, prep.vs,
                vm[u], vm[v], vm[v1], early_stop, batch)


def mc_gap_alternative(b: BunkbedInstance, n_samples: int, seed: int, early_stop: float | None = None,
                       batch: int = BATCH) -> McEstimate:
    """One fair coin per base edge picks which of its two copies is open; posts always open."""
    g, u, v, v1 = _posts_contracted(b)
    m = b.base.edge_count
    us = [e.u for e in g.edges]
    vs = [e.v for e in g.edges]

    def draw(main, ties, size):
        coin = (main.random_raw(size * m).reshape(size, m) >> np.uint64(63)).astype(np.uint8)
        return np.concatenate([1 - coin, coin], axis=1)

    return _run(n_samples, seed, draw, g.vertex_count, list(range(g.vertex_count)), us, vs,
                u, v, v1, early_stop, batch)
