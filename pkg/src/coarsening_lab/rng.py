"""Deterministic 64-bit random streams shared by every simulator.

All randomness is SplitMix64 (Steele-Lea-Vigna): a uint64 state advanced by
the odd constant GAMMA, passed through an xorshift-multiply finalizer.  Rule
id "splitmix64/v1", recorded in experiment sidecars:

* per-replica stream seed  = mix64(master_seed + (replica+1)*GAMMA)
* substreams (init / events / tie-breaks) start from mix64(seed ^ tag)
* uniform in [0,1) = (u64 >> 11) * 2^-53
* counter-mode draw i of a substream = mix64(sub_seed + (i+1)*GAMMA)

Streams are pure functions of (master_seed, replica, tag, index), so results
do not depend on thread count or completion order.  Tie-break uniforms are
counter-mode draws indexed by global event number: they can be evaluated
lazily (only when an update is actually tied) without desynchronizing a
coupled pair of simulations that shares the event stream.
"""

from __future__ import annotations

import numpy as np

GAMMA = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)

TAG_INIT = np.uint64(0x1B873593_9E3779B9)
TAG_EVENTS = np.uint64(0xCC9E2D51_85EBCA6B)
TAG_TIE = np.uint64(0xC2B2AE35_27D4EB2F)

U01_SCALE = 1.1102230246251565e-16  # 2^-53

MASK64 = np.uint64(0xFFFFFFFFFFFFFFFF)


def mix64(z: np.uint64) -> np.uint64:
    """SplitMix64 output finalizer."""
    with np.errstate(over="ignore"):
        z = np.uint64(z)
        z = np.uint64((z ^ (z >> np.uint64(30))) * _MIX1)
        z = np.uint64((z ^ (z >> np.uint64(27))) * _MIX2)
        return np.uint64(z ^ (z >> np.uint64(31)))


def replica_seed(master_seed: int, replica: int) -> np.uint64:
    """Stream seed for one replica; independent of execution order."""
    with np.errstate(over="ignore"):
        return mix64(np.uint64(master_seed) + np.uint64(replica + 1) * GAMMA)


def substream_seed(seed: np.uint64, tag: np.uint64) -> np.uint64:
    return mix64(np.uint64(seed) ^ np.uint64(tag))


def counter_u64(sub_seed: np.uint64, index) -> np.uint64:
    """Counter-mode draw: the index-th u64 of a substream."""
    with np.errstate(over="ignore"):
        idx = np.uint64(index) if np.isscalar(index) else index.astype(np.uint64)
        return mix64(np.uint64(sub_seed) + (idx + np.uint64(1)) * GAMMA)


def counter_unit(sub_seed: np.uint64, index) -> float:
    """Counter-mode uniform in [0, 1)."""
    u = counter_u64(sub_seed, index)
    return float((int(u) >> 11) * U01_SCALE)


def counter_units(sub_seed: np.uint64, n: int) -> np.ndarray:
    """Vector of the first n counter-mode uniforms of a substream."""
    idx = np.arange(n, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = np.uint64(sub_seed) + (idx + np.uint64(1)) * GAMMA
        z = (z ^ (z >> np.uint64(30))) * _MIX1
        z = (z ^ (z >> np.uint64(27))) * _MIX2
        z = z ^ (z >> np.uint64(31))
    return (z >> np.uint64(11)).astype(np.float64) * U01_SCALE


class Stream:
    """Sequential SplitMix64 stream (python-side mirror of the kernels)."""

    def __init__(self, seed: np.uint64):
        self.state = np.uint64(seed)

    def next_u64(self) -> np.uint64:
        with np.errstate(over="ignore"):
            self.state = np.uint64(self.state + GAMMA)
        return mix64(self.state)

    def next_unit(self) -> float:
        return float((int(self.next_u64()) >> 11) * U01_SCALE)

    def next_exponential(self, rate: float = 1.0) -> float:
        # -log1p(-u) is finite for u in [0,1)
        u = self.next_unit()
        return -np.log1p(-u) / rate

    def next_below(self, n: int) -> int:
        return int(self.next_u64() % np.uint64(n))


SEED_RULE_ID = "splitmix64/v1"
