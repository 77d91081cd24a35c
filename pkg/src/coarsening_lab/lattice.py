"""Finite d-dimensional spin boxes, boundary conditions, and local energy.

Sites of a box with sides (n_1, ..., n_d) are stored row-major:
index(x) = sum_i x_i * stride_i with stride_d = 1 and
stride_i = stride_{i+1} * n_{i+1}, so serialized configurations are
bit-comparable across runs.  Boundary spins are virtual: they are computed
from the BoundaryCondition, never stored.  A Free boundary contributes 0 to
the energy sum (a non-model diagnostic extension).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from .rng import TAG_INIT, counter_units, substream_seed

# Product of side lengths must stay below this (flat int64 indexing).
MAX_SITES = 2**31


class Boundary(Enum):
    """Virtual spin values outside the box."""

    ALL_PLUS = "AllPlus"
    ALL_MINUS = "AllMinus"
    QUADRANT = "Quadrant"  # -1 on {x1>=1, x2>=1}, +1 elsewhere; d=2 only
    FREE = "Free"  # missing neighbors contribute 0 (diagnostic mode)


@dataclass(frozen=True)
class BoxShape:
    """Axis-aligned box [0, n_1-1] x ... x [0, n_d-1]."""

    side_lengths: tuple[int, ...]

    def __post_init__(self):
        sides = tuple(int(n) for n in self.side_lengths)
        object.__setattr__(self, "side_lengths", sides)
        if len(sides) < 1:
            raise ValueError("dimension must be >= 1")
        if any(n < 1 for n in sides):
            raise ValueError(f"every side must be >= 1, got {sides}")
        n_sites = 1
        for n in sides:
            n_sites *= n
        if n_sites > MAX_SITES:
            raise ValueError(f"box has {n_sites} sites, limit is {MAX_SITES}")

    @property
    def dim(self) -> int:
        return len(self.side_lengths)

    @property
    def n_sites(self) -> int:
        return int(np.prod(self.side_lengths, dtype=np.int64))

    @property
    def strides(self) -> tuple[int, ...]:
        out = [1] * self.dim
        for i in range(self.dim - 2, -1, -1):
            out[i] = out[i + 1] * self.side_lengths[i + 1]
        return tuple(out)

    def index(self, coords: Sequence[int]) -> int:
        if len(coords) != self.dim:
            raise ValueError(f"site {coords} has wrong dimension")
        if not self.contains(coords):
            raise ValueError(f"site {tuple(coords)} outside box {self.side_lengths}")
        return int(sum(int(c) * s for c, s in zip(coords, self.strides)))

    def coords(self, index: int) -> tuple[int, ...]:
        if not 0 <= index < self.n_sites:
            raise ValueError(f"index {index} out of range")
        out = []
        for s in self.strides:
            out.append(index // s)
            index %= s
        return tuple(out)

    def contains(self, coords: Sequence[int]) -> bool:
        return all(0 <= int(c) < n for c, n in zip(coords, self.side_lengths))


def cube(n: int, d: int) -> BoxShape:
    """The box [0, n-1]^d."""
    return BoxShape((n,) * d)


def boundary_spin(boundary: Boundary, coords: Sequence[int]) -> int:
    """Virtual spin at an exterior site with the given global coordinates."""
    if boundary is Boundary.ALL_PLUS:
        return 1
    if boundary is Boundary.ALL_MINUS:
        return -1
    if boundary is Boundary.FREE:
        return 0
    # Quadrant pattern: -1 where both coordinates are >= 1
    return -1 if (coords[0] >= 1 and coords[1] >= 1) else 1


@dataclass
class SpinConfig:
    """Dense +-1 spins on a box, with a virtual boundary condition."""

    shape: BoxShape
    spins: np.ndarray
    boundary: Boundary = Boundary.ALL_PLUS

    def __post_init__(self):
        self.spins = np.asarray(self.spins, dtype=np.int8).ravel()
        if self.spins.size != self.shape.n_sites:
            raise ValueError(
                f"spin array has {self.spins.size} entries, box has {self.shape.n_sites} sites"
            )
        vals = np.unique(self.spins)
        if not np.all(np.isin(vals, [-1, 1])):
            raise ValueError("spins must be exactly -1 or +1")
        if self.boundary is Boundary.QUADRANT and self.shape.dim != 2:
            raise ValueError("Quadrant boundary requires d=2")

    def copy(self) -> "SpinConfig":
        return SpinConfig(self.shape, self.spins.copy(), self.boundary)

    def view(self) -> np.ndarray:
        return self.spins.reshape(self.shape.side_lengths)

    def spin_at(self, coords: Sequence[int]) -> int:
        return int(self.spins[self.shape.index(coords)])


def uniform_config(shape: BoxShape, value: int, boundary: Boundary = Boundary.ALL_PLUS) -> SpinConfig:
    if value not in (-1, 1):
        raise ValueError("value must be -1 or +1")
    return SpinConfig(shape, np.full(shape.n_sites, value, dtype=np.int8), boundary)


def local_energy(config: SpinConfig, site: Sequence[int]) -> int:
    """-(agreeing neighbors - disagreeing neighbors) at a site.

    Always even, in [-2d, 2d]; boundary spins are supplied virtually and a
    Free boundary contributes 0 per missing neighbor.
    """
    shape = config.shape
    if not shape.contains(site):
        raise ValueError(f"site {tuple(site)} outside box {shape.side_lengths}")
    s = config.spin_at(site)
    total = 0
    site = tuple(int(c) for c in site)
    for axis in range(shape.dim):
        for step in (-1, 1):
            nb = list(site)
            nb[axis] += step
            if shape.contains(nb):
                total += config.spin_at(nb)
            else:
                total += boundary_spin(config.boundary, nb)
    return -s * total


def fill_box(
    config: SpinConfig,
    lo: Sequence[int],
    stop: Sequence[int],
    value: int,
) -> SpinConfig:
    """New config with spins in the half-open sub-box [lo, stop) set to value."""
    if value not in (-1, 1):
        raise ValueError("value must be -1 or +1")
    shape = config.shape
    lo = tuple(int(c) for c in lo)
    stop = tuple(int(c) for c in stop)
    if len(lo) != shape.dim or len(stop) != shape.dim:
        raise ValueError("sub-box has wrong dimension")
    for a, b, n in zip(lo, stop, shape.side_lengths):
        if not (0 <= a <= b <= n):
            raise ValueError(f"sub-box [{lo}, {stop}) not inside box {shape.side_lengths}")
    out = config.copy()
    sl = tuple(slice(a, b) for a, b in zip(lo, stop))
    out.view()[sl] = value
    return out


def sample_product_config(
    shape: BoxShape,
    p: float,
    boundary: Boundary = Boundary.ALL_PLUS,
    seed: int = 0,
) -> SpinConfig:
    """i.i.d. spins, +1 with probability p; deterministic given seed."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must be in [0,1], got {p}")
    sub = substream_seed(np.uint64(seed), TAG_INIT)
    u = counter_units(sub, shape.n_sites)
    spins = np.where(u < p, 1, -1).astype(np.int8)
    return SpinConfig(shape, spins, boundary)


def quadrant_config(side: int) -> SpinConfig:
    """d=2 box on [0,side-1]^2 with -1 exactly on {x1>=1, x2>=1}, Quadrant boundary.

    Together with the Quadrant boundary pattern this restricts the infinite
    corner-growth initial state to a finite window.
    """
    shape = cube(side, 2)
    spins = np.ones((side, side), dtype=np.int8)
    spins[1:, 1:] = -1
    return SpinConfig(shape, spins.ravel(), Boundary.QUADRANT)


def padded_spins(config: SpinConfig) -> np.ndarray:
    """Spins embedded in a 1-cell pad ring holding the virtual boundary values.

    Free boundary pads with 0 so the energy sum needs no special cases.
    """
    shape = config.shape
    padded_shape = tuple(n + 2 for n in shape.side_lengths)
    pad = np.empty(padded_shape, dtype=np.int8)
    if config.boundary is Boundary.QUADRANT:
        n0, n1 = shape.side_lengths
        g0 = np.arange(-1, n0 + 1).reshape(-1, 1)
        g1 = np.arange(-1, n1 + 1).reshape(1, -1)
        pad[...] = np.where((g0 >= 1) & (g1 >= 1), -1, 1).astype(np.int8)
    else:
        fillval = {Boundary.ALL_PLUS: 1, Boundary.ALL_MINUS: -1, Boundary.FREE: 0}[config.boundary]
        pad[...] = fillval
    inner = tuple(slice(1, n + 1) for n in shape.side_lengths)
    pad[inner] = config.view()
    return pad


def pad_geometry(shape: BoxShape) -> tuple[np.ndarray, np.ndarray]:
    """(strides of the padded array, padded flat index of every in-box site)."""
    padded_sides = tuple(n + 2 for n in shape.side_lengths)
    strides = [1] * shape.dim
    for i in range(shape.dim - 2, -1, -1):
        strides[i] = strides[i + 1] * padded_sides[i + 1]
    strides = np.asarray(strides, dtype=np.int64)
    grids = np.meshgrid(*[np.arange(1, n + 1) for n in shape.side_lengths], indexing="ij")
    idx = sum(g * s for g, s in zip(grids, strides))
    return strides, idx.ravel().astype(np.int64)


# -- text serialization -------------------------------------------------------
#
# One header line `d=<d> sides=<n1,...,nd> boundary=<kind>`, then one row of
# +/- characters per leading multi-index (last axis along the row), row-major.

_CHAR = {1: "+", -1: "-"}
_SPIN = {"+": 1, "-": -1}


def config_to_text(config: SpinConfig) -> str:
    shape = config.shape
    header = "d={} sides={} boundary={}".format(
        shape.dim, ",".join(str(n) for n in shape.side_lengths), config.boundary.value
    )
    arr = config.view().reshape(-1, shape.side_lengths[-1])
    rows = ["".join(_CHAR[int(v)] for v in row) for row in arr]
    return "\n".join([header] + rows) + "\n"


def config_from_text(text: str) -> SpinConfig:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ValueError("empty config text")
    header = lines[0].split()
    fields = dict(part.split("=", 1) for part in header)
    dim = int(fields["d"])
    sides = tuple(int(s) for s in fields["sides"].split(","))
    if len(sides) != dim:
        raise ValueError("header dimension does not match sides")
    boundary = Boundary(fields["boundary"])
    shape = BoxShape(sides)
    n_rows = shape.n_sites // sides[-1]
    rows = lines[1:]
    if len(rows) != n_rows:
        raise ValueError(f"expected {n_rows} rows, found {len(rows)}")
    spins = np.empty((n_rows, sides[-1]), dtype=np.int8)
    for i, row in enumerate(rows):
        if len(row) != sides[-1]:
            raise ValueError(f"row {i} has length {len(row)}, expected {sides[-1]}")
        spins[i] = [_SPIN[ch] for ch in row]
    return SpinConfig(shape, spins.ravel(), boundary)
