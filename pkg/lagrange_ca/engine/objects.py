"""
Simulation objects: lattice fields and particle waves.

A ParticleWave owns one column of a PwCollection (its path table). Two
particle waves produced by the same interaction share one table, each
reading its own column, so their rows stay correlated.
"""
from __future__ import annotations

import math
from collections.abc import Mapping
from dataclasses import dataclass, field, replace
from fractions import Fraction

import numpy as np

from lagrange_ca.config import NORMALIZATION_TOLERANCE
from lagrange_ca.dsl.polynomial import BoundPolynomial

Momentum = Fraction | float


@dataclass(frozen=True)
class PathMember:
    """Kinematic state of one particle along one path."""

    ptype: str
    x: float
    p: Momentum
    sigma: int
    t: float = 0.0


@dataclass(frozen=True)
class PathRow:
    members: tuple[PathMember, ...]
    amplitude: complex

    def momenta(self) -> tuple[Momentum, ...]:
        return tuple(m.p for m in self.members)


@dataclass(frozen=True)
class PwCollection:
    rows: tuple[PathRow, ...]
    source_weight: float = 1.0

    @property
    def width(self) -> int:
        return len(self.rows[0].members) if self.rows else 0

    def norm(self) -> float:
        return math.fsum(abs(row.amplitude) ** 2 for row in self.rows)

    def normalized(self) -> "PwCollection":
        """Rows scaled to unit total weight; already-unit tables are returned as is."""
        total = self.norm()
        if total == 0 or abs(total - 1.0) <= NORMALIZATION_TOLERANCE:
            return self
        scale = 1.0 / math.sqrt(total)
        rows = tuple(replace(row, amplitude=row.amplitude * scale) for row in self.rows)
        return replace(self, rows=rows)

    def with_column(self, column: int, members: list[PathMember]) -> "PwCollection":
        rows = []
        for row, member in zip(self.rows, members):
            updated = list(row.members)
            updated[column] = member
            rows.append(replace(row, members=tuple(updated)))
        return replace(self, rows=tuple(rows))


@dataclass(frozen=True)
class ParticleWave:
    id: str
    ptype: str
    mass: float
    paths: PwCollection
    column: int = 0
    relativistic: bool = False
    tau: float = 0.0
    partner: str | None = None

    def members(self) -> list[PathMember]:
        return [row.members[self.column] for row in self.paths.rows]

    def expected_position(self) -> float:
        weights = [abs(row.amplitude) ** 2 for row in self.paths.rows]
        total = math.fsum(weights) or 1.0
        return math.fsum(w * m.x for w, m in zip(weights, self.members())) / total

    def expected_momentum(self) -> float:
        weights = [abs(row.amplitude) ** 2 for row in self.paths.rows]
        total = math.fsum(weights) or 1.0
        return math.fsum(w * float(m.p) for w, m in zip(weights, self.members())) / total


@dataclass(frozen=True, eq=False)
class FieldState:
    """A complex lattice field with the time slices its stencil family needs."""

    id: str
    family: str
    psi: np.ndarray
    rhs: BoundPolynomial
    prev: np.ndarray | None = None
    rate: np.ndarray | None = None
    potential: np.ndarray | None = None
    params: Mapping[str, float] = field(default_factory=dict)
    ptype: str = "generic"
    spin: int = 1
    mass: float = 1.0
    source: tuple[str, str, float] | None = None
    initial_norm: float = 0.0

    def norm(self, dx: float) -> float:
        return float(np.sum(np.abs(self.psi) ** 2) * dx ** self.psi.ndim)
