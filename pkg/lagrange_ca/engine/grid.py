"""
Cell grid geometry: extents, spacing, boundary and coordinate lookups.

Cell centres sit at i·Δx. Cells are addressed by their flat (C-order) index.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from lagrange_ca.stencils.differences import FIXED, PERIODIC


@dataclass(frozen=True)
class CellGrid:
    extents: tuple[int, ...]
    dx: float
    boundary: str = PERIODIC

    def __post_init__(self):
        if len(self.extents) not in (1, 2):
            raise ValueError("grids are one- or two-dimensional")
        if any(n < 3 for n in self.extents):
            raise ValueError("every grid extent needs at least 3 cells")
        if not self.dx > 0:
            raise ValueError("grid spacing must be positive")
        if self.boundary not in (PERIODIC, FIXED):
            raise ValueError(f"unknown boundary '{self.boundary}'")

    @property
    def dims(self) -> int:
        return len(self.extents)

    @property
    def size(self) -> int:
        return math.prod(self.extents)

    @property
    def lengths(self) -> tuple[float, ...]:
        return tuple(n * self.dx for n in self.extents)

    def axis(self, i: int = 0) -> np.ndarray:
        return np.arange(self.extents[i]) * self.dx

    @cached_property
    def coordinates(self) -> tuple[np.ndarray, ...]:
        return tuple(np.meshgrid(*(self.axis(i) for i in range(self.dims)), indexing="ij"))

    def displacement(self, axis: int, origin: float) -> np.ndarray:
        """Coordinate minus origin, folded to the nearest image on periodic grids."""
        delta = self.coordinates[axis] - origin
        if self.boundary == PERIODIC:
            length = self.lengths[axis]
            delta = (delta + length / 2) % length - length / 2
        return delta

    def position_of(self, cell: int) -> tuple[float, ...]:
        index = np.unravel_index(cell, self.extents)
        return tuple(float(i) * self.dx for i in index)

    def cell_of(self, x: float) -> int:
        """Nearest cell to a 1D position."""
        n = self.extents[0]
        i = int(math.floor(x / self.dx + 0.5))
        if self.boundary == PERIODIC:
            return i % n
        return min(max(i, 0), n - 1)

    def confine(self, x: float) -> tuple[float, bool]:
        """Bring a particle position back on the grid; True when it reflected."""
        if self.boundary == PERIODIC:
            return x % self.lengths[0], False
        upper = (self.extents[0] - 1) * self.dx
        if x < 0:
            return -x, True
        if x > upper:
            return 2 * upper - x, True
        return x, False
