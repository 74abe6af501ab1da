"""Domains, uniform lattice grids, and the inradius.

Domains are 1D intervals, axis-aligned rectangles, or boolean cell masks.
Grids carry an interior/boundary classification per node; functions built on
them vanish on boundary nodes (zero trace), so the boundary set itself is the
discrete representation of the Dirichlet condition.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np
from scipy import ndimage


class DomainError(ValueError):
    """Invalid domain description (empty, disconnected, bad bounds)."""


@dataclass(frozen=True)
class Interval:
    a: float
    b: float

    def __post_init__(self):
        if not self.a < self.b:
            raise DomainError(f"interval needs a < b, got ({self.a}, {self.b})")


@dataclass(frozen=True)
class Rectangle:
    ax: float
    bx: float
    ay: float
    by: float

    def __post_init__(self):
        if not (self.ax < self.bx and self.ay < self.by):
            raise DomainError(
                f"rectangle needs ax < bx and ay < by, got "
                f"({self.ax}, {self.bx}) x ({self.ay}, {self.by})"
            )


@dataclass(frozen=True)
class MaskDomain:
    """Union of axis-aligned square cells; cells[ix, iy] = True means inside."""

    width: int
    height: int
    cells: np.ndarray = field(repr=False)
    cell_size: float = 1.0

    def __post_init__(self):
        cells = np.asarray(self.cells, dtype=bool)
        if cells.shape != (self.width, self.height):
            raise DomainError(
                f"cells shape {cells.shape} != ({self.width}, {self.height})"
            )
        if self.cell_size <= 0:
            raise DomainError("cell_size must be positive")
        if not cells.any():
            raise DomainError("mask has no interior cells")
        _, ncomp = ndimage.label(cells)
        if ncomp != 1:
            raise DomainError(f"mask interior is not 4-connected ({ncomp} components)")
        object.__setattr__(self, "cells", cells)

    def __eq__(self, other):
        if not isinstance(other, MaskDomain):
            return NotImplemented
        return (
            self.width == other.width
            and self.height == other.height
            and self.cell_size == other.cell_size
            and np.array_equal(self.cells, other.cells)
        )

    def __hash__(self):
        return hash((self.width, self.height, self.cell_size, self.cells.tobytes()))


DomainSpec = Union[Interval, Rectangle, MaskDomain]


def read_mask_file(path) -> MaskDomain:
    """Parse the plain-text mask format: "W H h", then H rows of W characters,
    '#' inside / '.' outside, listed top row first."""
    with open(path) as fh:
        lines = [ln.rstrip("\n") for ln in fh if ln.strip()]
    if not lines:
        raise DomainError(f"{path}: empty mask file")
    head = lines[0].split()
    if len(head) != 3:
        raise DomainError(f"{path}: header must be 'W H h'")
    w, hgt = int(head[0]), int(head[1])
    size = float(head[2])
    rows = lines[1:]
    if len(rows) != hgt:
        raise DomainError(f"{path}: expected {hgt} rows, got {len(rows)}")
    cells = np.zeros((w, hgt), dtype=bool)
    for r, row in enumerate(rows):
        if len(row) != w:
            raise DomainError(f"{path}: row {r} has length {len(row)}, expected {w}")
        iy = hgt - 1 - r  # top row of the file is the top of the domain
        for ix, ch in enumerate(row):
            if ch == "#":
                cells[ix, iy] = True
            elif ch != ".":
                raise DomainError(f"{path}: bad character {ch!r} in row {r}")
    return MaskDomain(width=w, height=hgt, cells=cells, cell_size=size)


def write_mask_file(path, spec: MaskDomain) -> None:
    with open(path, "w") as fh:
        fh.write(f"{spec.width} {spec.height} {spec.cell_size!r}\n")
        for r in range(spec.height):
            iy = spec.height - 1 - r
            fh.write("".join("#" if spec.cells[ix, iy] else "."
                             for ix in range(spec.width)) + "\n")


@dataclass(frozen=True)
class Grid:
    """Uniform node lattice over a domain.

    Node arrays are indexed [ix] (1D) or [ix, iy] (2D).  `interior` and
    `boundary` partition the nodes that belong to the closed domain; nodes in
    neither set lie outside a mask domain and never carry values.  `cell_mask`
    marks lattice cells inside the domain; energies sum over these cells.
    """

    spec: DomainSpec = field(repr=False)
    dim: int
    h: float
    origin: tuple
    shape: tuple
    interior: np.ndarray = field(repr=False)
    boundary: np.ndarray = field(repr=False)
    cell_mask: np.ndarray = field(repr=False)

    @property
    def num_interior(self) -> int:
        return int(self.interior.sum())

    def node_coords(self):
        """Physical coordinates of every node, shape = self.shape (+ (dim,))."""
        axes = [self.origin[d] + self.h * np.arange(self.shape[d])
                for d in range(self.dim)]
        if self.dim == 1:
            return axes[0]
        xs, ys = np.meshgrid(axes[0], axes[1], indexing="ij")
        return np.stack([xs, ys], axis=-1)


def build_grid(spec: DomainSpec, n: int) -> Grid:
    """Discretize `spec` with n interior nodes (interval) or n cells along the
    shorter side (rectangle / mask)."""
    if n < 3:
        raise DomainError(f"resolution n must be >= 3, got {n}")
    if isinstance(spec, Interval):
        h = (spec.b - spec.a) / (n + 1)
        shape = (n + 2,)
        interior = np.zeros(shape, dtype=bool)
        interior[1:-1] = True
        boundary = np.zeros(shape, dtype=bool)
        boundary[0] = boundary[-1] = True
        cell_mask = np.ones(n + 1, dtype=bool)
        return Grid(spec, 1, h, (spec.a,), shape, interior, boundary, cell_mask)

    if isinstance(spec, Rectangle):
        lx, ly = spec.bx - spec.ax, spec.by - spec.ay
        h = min(lx, ly) / n
        nx, ny = lx / h, ly / h
        if abs(nx - round(nx)) > 1e-12 * max(1.0, nx) or \
           abs(ny - round(ny)) > 1e-12 * max(1.0, ny):
            raise DomainError(
                f"spacing h={h} does not divide the rectangle sides ({lx}, {ly})"
            )
        nx, ny = int(round(nx)), int(round(ny))
        shape = (nx + 1, ny + 1)
        interior = np.zeros(shape, dtype=bool)
        interior[1:-1, 1:-1] = True
        boundary = ~interior
        cell_mask = np.ones((nx, ny), dtype=bool)
        return Grid(spec, 2, h, (spec.ax, spec.ay), shape, interior, boundary,
                    cell_mask)

    if isinstance(spec, MaskDomain):
        short = min(spec.width, spec.height)
        m = max(1, math.ceil(n / short))  # subdivisions per mask cell
        h = spec.cell_size / m
        nx, ny = spec.width * m, spec.height * m
        # fine cell (i, j) is inside iff its coarse mask cell is
        cell_mask = np.repeat(np.repeat(spec.cells, m, axis=0), m, axis=1)
        shape = (nx + 1, ny + 1)
        # incident[i, j] over nodes: count of inside cells touching node (i, j)
        padded = np.zeros((nx + 2, ny + 2), dtype=np.int8)
        padded[1:-1, 1:-1] = cell_mask
        incident = (padded[:-1, :-1] + padded[1:, :-1]
                    + padded[:-1, 1:] + padded[1:, 1:])
        interior = incident == 4
        boundary = (incident > 0) & ~interior
        return Grid(spec, 2, h, (0.0, 0.0), shape, interior, boundary, cell_mask)

    raise TypeError(f"unknown domain spec {type(spec).__name__}")


def inradius(spec: DomainSpec, grid: Grid | None = None) -> float:
    """Radius of the largest inscribed ball.

    Exact for intervals and rectangles.  For masks, the max over interior
    nodes of the Euclidean distance to the nearest non-interior node (exact
    distance transform), accurate to within one grid spacing.
    """
    if isinstance(spec, Interval):
        return 0.5 * (spec.b - spec.a)
    if isinstance(spec, Rectangle):
        return 0.5 * min(spec.bx - spec.ax, spec.by - spec.ay)
    if isinstance(spec, MaskDomain):
        if grid is None:
            grid = build_grid(spec, 3 * min(spec.width, spec.height))
        dist = ndimage.distance_transform_edt(grid.interior, sampling=grid.h)
        return float(dist.max())
    raise TypeError(f"unknown domain spec {type(spec).__name__}")
