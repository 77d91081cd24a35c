"""Continuous-time q-biased zero-temperature Glauber dynamics on finite boxes.

The engine runs a single exponential race at rate = site count and picks a
uniform site per event, which has the same law as independent rate-1 site
clocks.  On a ring with local energy e: keep the spin if e < 0, flip it if
e > 0, and on a tie (e = 0) set it to +1 with probability q using a fresh
uniform drawn from a counter-mode substream indexed by the event number.
Identical (seed, inputs) give bit-identical trajectories regardless of how
evolve calls are split or how many worker threads run elsewhere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import _kernels as K
from .lattice import SpinConfig, pad_geometry, padded_spins
from .rng import TAG_EVENTS, TAG_TIE, substream_seed


@dataclass(frozen=True)
class Timeout:
    """Censored erosion: the box was not all +1 by t_max."""

    t_max: float


@dataclass(frozen=True)
class Never:
    """The watched event did not occur by the horizon."""

    horizon: float


@dataclass
class GlauberSim:
    """One trajectory: spin configuration plus its seeded event stream."""

    config: SpinConfig
    q: float
    clock_time: float = 0.0
    event_count: int = 0
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.q <= 1.0:
            raise ValueError(f"q must be in [0,1], got {self.q}")
        self.config = self.config.copy()
        self._pad = padded_spins(self.config).ravel()
        self._strides, self._site_pad = pad_geometry(self.config.shape)
        base = np.uint64(self.seed)
        self._state = substream_seed(base, TAG_EVENTS)
        self._tie_seed = substream_seed(base, TAG_TIE)
        self._next_time = math.nan

    def _sync_config(self):
        self.config.spins = self._pad[self._site_pad].astype(np.int8)

    def spin_at(self, coords: Sequence[int]) -> int:
        return int(self._pad[self._site_pad[self.config.shape.index(coords)]])

    def minus_count(self) -> int:
        return int(np.sum(self._pad[self._site_pad] == -1))


def evolve_until(sim: GlauberSim, t: float) -> GlauberSim:
    """Advance the trajectory to model time t (in place; returns sim)."""
    if not math.isfinite(t):
        raise ValueError(f"target time must be finite, got {t}")
    if t < sim.clock_time:
        raise ValueError(f"target time {t} is before current time {sim.clock_time}")
    d = sim.config.shape.dim
    state, event_i, next_time, _ = K.glauber_advance(
        sim._pad, sim._site_pad, sim._strides, d, float(sim.q),
        sim._state, sim._tie_seed, np.uint64(sim.event_count),
        sim._next_time, sim.clock_time, float(t),
    )
    sim._state = np.uint64(state)
    sim.event_count = int(event_i)
    sim._next_time = float(next_time)
    sim.clock_time = float(t)
    sim._sync_config()
    return sim


@dataclass
class CoupledPair:
    """Two trajectories sharing rings, site picks, and tie-break uniforms.

    With low.config <= high.config pointwise (boundary pads included) and
    q_low <= q_high, the pointwise order is preserved at every event.
    """

    low: GlauberSim
    high: GlauberSim
    violations: int = 0

    def __post_init__(self):
        lo, hi = self.low, self.high
        if lo.config.shape != hi.config.shape:
            raise ValueError("coupled configs must share a shape")
        if lo.q > hi.q:
            raise ValueError(f"need q_low <= q_high, got {lo.q} > {hi.q}")
        if np.any(lo._pad > hi._pad):
            raise ValueError("initial configs (with boundary) are not pointwise ordered")
        # the pair owns the event stream of its low member
        hi._state = lo._state
        hi._tie_seed = lo._tie_seed


def couple(low_config: SpinConfig, q_low: float, high_config: SpinConfig, q_high: float, seed: int = 0) -> CoupledPair:
    return CoupledPair(GlauberSim(low_config, q_low, seed=seed), GlauberSim(high_config, q_high, seed=seed))


def evolve_coupled(pair: CoupledPair, t: float, check_order: bool = True) -> CoupledPair:
    """Advance both members to time t under the shared event stream."""
    lo, hi = pair.low, pair.high
    if not math.isfinite(t):
        raise ValueError(f"target time must be finite, got {t}")
    if t < lo.clock_time:
        raise ValueError(f"target time {t} is before current time {lo.clock_time}")
    d = lo.config.shape.dim
    state, event_i, next_time, viol = K.coupled_advance(
        lo._pad, hi._pad, lo._site_pad, lo._strides, d, float(lo.q), float(hi.q),
        lo._state, lo._tie_seed, np.uint64(lo.event_count), lo._next_time,
        lo.clock_time, float(t), bool(check_order),
    )
    for sim in (lo, hi):
        sim._state = np.uint64(state)
        sim.event_count = int(event_i)
        sim._next_time = float(next_time)
        sim.clock_time = float(t)
        sim._sync_config()
    pair.violations += int(viol)
    return pair


def erosion_time(L: int, q: float, d: int, seed: int = 0, t_max: float = 1e4):
    """First time an all -1 cube [0,L-1]^d in a +1 sea is entirely +1.

    The -1 region cannot leave the cube under these dynamics, so simulating
    the cube with an AllPlus boundary is exact.  Returns the erosion time or
    Timeout(t_max) as censored data.
    """
    if L < 1:
        raise ValueError("L must be >= 1")
    if d < 1:
        raise ValueError("d must be >= 1")
    if not 0.0 <= q <= 1.0:
        raise ValueError(f"q must be in [0,1], got {q}")
    if not t_max > 0:
        raise ValueError(f"t_max must be positive, got {t_max}")
    npad, strides, site_pad = K._cube_geometry(L, d)
    t, censored = K._erosion_one(L, d, float(q), np.uint64(seed), float(t_max), npad, strides, site_pad)
    return Timeout(float(t_max)) if censored else float(t)


def erosion_times(L: int, q: float, d: int, master_seed: int, replicas: int, t_max: float):
    """Replicated erosion times with per-replica derived seeds.

    Returns (times, censored); censored entries hold t_max and must be kept
    as censored data, never dropped.
    """
    if replicas < 1:
        raise ValueError("replicas must be >= 1")
    if not t_max > 0:
        raise ValueError(f"t_max must be positive, got {t_max}")
    out_t = np.empty(replicas, np.float64)
    out_c = np.empty(replicas, np.bool_)
    K.erosion_many(L, d, float(q), np.uint64(master_seed), replicas, float(t_max), out_t, out_c)
    return out_t, out_c


def first_minus_time_after(sim: GlauberSim, site: Sequence[int], t: float, horizon: float):
    """First time >= t at which the site holds spin -1, or Never(horizon)."""
    if not horizon > t:
        raise ValueError(f"horizon {horizon} must exceed t {t}")
    evolve_until(sim, t)
    watch_p = sim._site_pad[sim.config.shape.index(site)]
    if sim._pad[watch_p] == -1:
        return float(t)
    d = sim.config.shape.dim
    state, event_i, next_time, found = K.glauber_watch_minus(
        sim._pad, sim._site_pad, sim._strides, d, float(sim.q),
        sim._state, sim._tie_seed, np.uint64(sim.event_count),
        sim._next_time, sim.clock_time, float(horizon), watch_p,
    )
    sim._state = np.uint64(state)
    sim.event_count = int(event_i)
    sim._next_time = float(next_time)
    sim.clock_time = float(horizon) if math.isnan(found) else float(found)
    sim._sync_config()
    return Never(float(horizon)) if math.isnan(found) else float(found)


EVENT_LOG_HEADER = "event_index,time,site_index,e_x,old_spin,new_spin,used_tiebreak"


def dump_event_log(sim: GlauberSim, t: float) -> list[str]:
    """Advance to t, returning one CSV line per event (debug tool)."""
    if t < sim.clock_time:
        raise ValueError(f"target time {t} is before current time {sim.clock_time}")
    n = sim.config.shape.n_sites
    lines = [EVENT_LOG_HEADER]
    d = sim.config.shape.dim
    while True:
        expected = max(64, int(n * (t - sim.clock_time) * 1.5) + 64)
        lt = np.empty(expected, np.float64)
        ls = np.empty(expected, np.int64)
        le = np.empty(expected, np.int8)
        lo = np.empty(expected, np.int8)
        ln = np.empty(expected, np.int8)
        lu = np.empty(expected, np.int8)
        state, event_i, next_time, k = K.glauber_advance_log(
            sim._pad, sim._site_pad, sim._strides, d, float(sim.q),
            sim._state, sim._tie_seed, np.uint64(sim.event_count),
            sim._next_time, sim.clock_time, float(t),
            lt, ls, le, lo, ln, lu,
        )
        base = sim.event_count
        sim._state = np.uint64(state)
        sim.event_count = int(event_i)
        sim._next_time = float(next_time)
        for i in range(k):
            lines.append(
                f"{base + i},{float(lt[i])!r},{ls[i]},{le[i]},{lo[i]},{ln[i]},{lu[i]}"
            )
        if k < expected or sim._next_time > t:
            break
        sim.clock_time = float(lt[k - 1])
    sim.clock_time = float(t)
    sim._sync_config()
    return lines
