"""Modified bootstrap percolation and the threshold-two -1 closure.

MBP rule: a vacant site becomes occupied once every one of the d axis
directions contributes at least one occupied neighbor; sites outside the
box count as vacant.  The -1 closure on renormalized fields uses the
threshold-two rule (at least two of the 2d axis neighbors equal -1), with
+1 outside the domain, and its -1 sites are covered by a minimal collection
of well-separated rectangles (no lattice site within l1-distance 1 of two of
them).
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from .lattice import Boundary, BoxShape, SpinConfig, config_from_text, config_to_text
from .rng import TAG_INIT, counter_units, replica_seed, substream_seed
from .stats import BinomialEstimate, wilson_interval


@dataclass
class MbpConfig:
    """Dense {0,1} occupation field on a box."""

    shape: BoxShape
    occupied: np.ndarray

    def __post_init__(self):
        self.occupied = np.asarray(self.occupied, dtype=np.uint8).ravel()
        if self.occupied.size != self.shape.n_sites:
            raise ValueError("occupation array does not match the box")
        if not np.all((self.occupied == 0) | (self.occupied == 1)):
            raise ValueError("occupation values must be 0 or 1")

    def view(self) -> np.ndarray:
        return self.occupied.reshape(self.shape.side_lengths)

    def copy(self) -> "MbpConfig":
        return MbpConfig(self.shape, self.occupied.copy())


def _axis_supported(occ: np.ndarray, d: int) -> np.ndarray:
    """Boolean array: every axis has an occupied neighbor (outside = vacant)."""
    ok = np.ones(occ.shape, dtype=bool)
    for axis in range(d):
        has = np.zeros(occ.shape, dtype=bool)
        src = occ.astype(bool)
        sl_lo = [slice(None)] * d
        sl_hi = [slice(None)] * d
        sl_lo[axis] = slice(None, -1)
        sl_hi[axis] = slice(1, None)
        has[tuple(sl_lo)] |= src[tuple(sl_hi)]
        has[tuple(sl_hi)] |= src[tuple(sl_lo)]
        ok &= has
    return ok


def mbp_step(config: MbpConfig) -> MbpConfig:
    """One synchronous MBP update; occupied sites persist."""
    occ = config.view()
    newly = (occ == 0) & _axis_supported(occ, config.shape.dim)
    out = config.copy()
    out.view()[newly] = 1
    return out


def _rule_met(occ, coords, shape) -> bool:
    for axis in range(shape.dim):
        hit = False
        for step in (-1, 1):
            nb = list(coords)
            nb[axis] += step
            if shape.contains(nb) and occ[tuple(nb)]:
                hit = True
                break
        if not hit:
            return False
    return True


def mbp_closure(config: MbpConfig) -> MbpConfig:
    """Fixed point of mbp_step via a work queue.

    Only neighbors of newly occupied sites are re-examined, so typical cost
    is linear in the site count.
    """
    shape = config.shape
    out = config.copy()
    occ = out.view()
    d = shape.dim
    queue = deque(zip(*np.nonzero(occ == 0)))
    # initial pass over vacant sites; afterwards only neighborhoods of growth
    pending = deque()
    for coords in queue:
        if _rule_met(occ, coords, shape):
            pending.append(coords)
    while pending:
        coords = pending.popleft()
        if occ[coords]:
            continue
        if not _rule_met(occ, coords, shape):
            continue
        occ[coords] = 1
        for axis in range(d):
            for step in (-1, 1):
                nb = list(coords)
                nb[axis] += step
                nbt = tuple(nb)
                if shape.contains(nbt) and not occ[nbt]:
                    pending.append(nbt)
    return out


def internally_spans(config: MbpConfig, lo, stop) -> bool:
    """Does the restriction to the half-open sub-box [lo, stop) span it?

    The restricted configuration is zero outside the sub-box; for axis boxes
    the closure never escapes the sub-box, so it is computed there directly.
    """
    shape = config.shape
    lo = tuple(int(c) for c in lo)
    stop = tuple(int(c) for c in stop)
    for a, b, n in zip(lo, stop, shape.side_lengths):
        if not (0 <= a < b <= n):
            raise ValueError(f"sub-box [{lo}, {stop}) not inside {shape.side_lengths}")
    sl = tuple(slice(a, b) for a, b in zip(lo, stop))
    sub = config.view()[sl]
    sub_cfg = MbpConfig(BoxShape(sub.shape), sub.copy().ravel())
    return bool(np.all(mbp_closure(sub_cfg).occupied == 1))


def mbp_to_text(config: MbpConfig) -> str:
    """SpinConfig text format with occupied <-> '+' and vacant <-> '-'."""
    spins = np.where(config.occupied == 1, 1, -1).astype(np.int8)
    return config_to_text(SpinConfig(config.shape, spins, Boundary.FREE))


def mbp_from_text(text: str) -> MbpConfig:
    cfg = config_from_text(text)
    return MbpConfig(cfg.shape, (cfg.spins == 1).astype(np.uint8))


def sample_mbp_config(shape: BoxShape, theta: float, seed: int = 0) -> MbpConfig:
    if not 0.0 <= theta <= 1.0:
        raise ValueError(f"theta must be in [0,1], got {theta}")
    sub = substream_seed(np.uint64(seed), TAG_INIT)
    u = counter_units(sub, shape.n_sites)
    return MbpConfig(shape, (u < theta).astype(np.uint8))


def spanning_probability(n: int, theta: float, d: int, replicas: int, seed: int = 0) -> BinomialEstimate:
    """Monte Carlo internal-spanning probability of [0,n-1]^d under product(theta)."""
    if replicas < 1:
        raise ValueError("replicas must be >= 1")
    if not 0.0 <= theta <= 1.0:
        raise ValueError(f"theta must be in [0,1], got {theta}")
    shape = BoxShape((n,) * d)
    hits = 0
    for r in range(replicas):
        cfg = sample_mbp_config(shape, theta, seed=int(replica_seed(seed, r)))
        if internally_spans(cfg, (0,) * d, (n,) * d):
            hits += 1
    return wilson_interval(hits, replicas)


# -- threshold-two -1 closure and well-separated rectangles ----------------------


def minus_bootstrap_closure(field: np.ndarray) -> np.ndarray:
    """Fixed point of: a site turns -1 once >= 2 axis neighbors are -1.

    field is a +-1 array of any dimension; sites outside count as +1.
    """
    f = np.asarray(field)
    if not np.all(np.isin(f, [-1, 1])):
        raise ValueError("field values must be +-1")
    cur = f == -1
    d = cur.ndim
    while True:
        count = np.zeros(cur.shape, dtype=np.int8)
        for axis in range(d):
            sl_lo = [slice(None)] * d
            sl_hi = [slice(None)] * d
            sl_lo[axis] = slice(None, -1)
            sl_hi[axis] = slice(1, None)
            count[tuple(sl_lo)] += cur[tuple(sl_hi)]
            count[tuple(sl_hi)] += cur[tuple(sl_lo)]
        new = cur | (count >= 2)
        if np.array_equal(new, cur):
            break
        cur = new
    out = np.where(cur, -1, 1).astype(np.int8)
    return out


@dataclass(frozen=True)
class Rectangle:
    """Axis-aligned box of lattice sites, closed intervals per axis."""

    lo: tuple[int, ...]
    hi: tuple[int, ...]

    def __post_init__(self):
        if len(self.lo) != len(self.hi) or any(a > b for a, b in zip(self.lo, self.hi)):
            raise ValueError(f"bad rectangle {self.lo}..{self.hi}")

    def contains(self, coords) -> bool:
        return all(a <= c <= b for a, c, b in zip(self.lo, coords, self.hi))

    @property
    def sides(self) -> tuple[int, ...]:
        return tuple(b - a + 1 for a, b in zip(self.lo, self.hi))


def _interval_gap(lo1, hi1, lo2, hi2) -> int:
    return max(0, lo2 - hi1, lo1 - hi2)


def rectangles_conflict(r1: Rectangle, r2: Rectangle) -> bool:
    """True iff some lattice site is within l1-distance 1 of both rectangles.

    A site splits its l1 deficit across axes freely, so such a site exists
    exactly when the axis gaps sum to at most 2.
    """
    return sum(_interval_gap(a1, b1, a2, b2) for (a1, b1), (a2, b2)
               in zip(zip(r1.lo, r1.hi), zip(r2.lo, r2.hi))) <= 2


def _merge(r1: Rectangle, r2: Rectangle) -> Rectangle:
    return Rectangle(
        tuple(min(a, b) for a, b in zip(r1.lo, r2.lo)),
        tuple(max(a, b) for a, b in zip(r1.hi, r2.hi)),
    )


@dataclass(frozen=True)
class RectangleSet:
    rectangles: tuple[Rectangle, ...]

    def well_separated(self) -> bool:
        rs = self.rectangles
        return all(
            not rectangles_conflict(rs[i], rs[j])
            for i in range(len(rs))
            for j in range(i + 1, len(rs))
        )

    def covers(self, coords) -> bool:
        return any(r.contains(coords) for r in self.rectangles)


def _minus_components(minus: np.ndarray) -> list[list[tuple[int, ...]]]:
    """Connected components of the -1 set under l1 adjacency."""
    d = minus.ndim
    seen = np.zeros(minus.shape, dtype=bool)
    comps = []
    for coords in zip(*np.nonzero(minus)):
        if seen[coords]:
            continue
        comp = []
        stack = [coords]
        seen[coords] = True
        while stack:
            c = stack.pop()
            comp.append(c)
            for axis in range(d):
                for step in (-1, 1):
                    nb = list(c)
                    nb[axis] += step
                    nbt = tuple(nb)
                    if all(0 <= x < n for x, n in zip(nbt, minus.shape)) and minus[nbt] and not seen[nbt]:
                        seen[nbt] = True
                        stack.append(nbt)
        comps.append(comp)
    return comps


def minus_bootstrap_rectangles(field: np.ndarray) -> RectangleSet:
    """Minimal well-separated rectangle cover of the -1 closure of a field.

    Starts from bounding boxes of the closure's -1 components and merges
    conflicting rectangles to a fixed point.
    """
    closed = minus_bootstrap_closure(field)
    comps = _minus_components(closed == -1)
    rects = [
        Rectangle(tuple(min(c[a] for c in comp) for a in range(closed.ndim)),
                  tuple(max(c[a] for c in comp) for a in range(closed.ndim)))
        for comp in comps
    ]
    changed = True
    while changed:
        changed = False
        for i in range(len(rects)):
            for j in range(i + 1, len(rects)):
                if rectangles_conflict(rects[i], rects[j]):
                    merged = _merge(rects[i], rects[j])
                    rects = [r for k, r in enumerate(rects) if k not in (i, j)]
                    rects.append(merged)
                    changed = True
                    break
            if changed:
                break
    return RectangleSet(tuple(sorted(rects, key=lambda r: r.lo)))
