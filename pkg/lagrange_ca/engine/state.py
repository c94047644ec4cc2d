"""
System state: the grid, the objects living on it, and the bound dynamics.

The state is a frozen value. `tick` builds a new one; nothing mutates a
state another caller can still see.
"""
from __future__ import annotations

import math
from collections import defaultdict
from collections.abc import Callable, Mapping
from dataclasses import dataclass, field

import numpy as np

from lagrange_ca.config import DEFAULT_C, NORM_DIVERGENCE_FACTOR
from lagrange_ca.dsl.polynomial import BoundPolynomial
from lagrange_ca.engine.grid import CellGrid
from lagrange_ca.engine.objects import FieldState, ParticleWave
from lagrange_ca.engine.rng import GeneratorState
from lagrange_ca.errors import UnknownObjectError
from lagrange_ca.interaction.settings import InteractionEvent, InteractionSettings
from lagrange_ca.stencils.program import StencilProgram
from lagrange_ca.stencils.schrodinger import CORRECTED

PhysicalObject = FieldState | ParticleWave


@dataclass(frozen=True, eq=False)
class Dynamics:
    """Everything a tick needs besides the objects themselves.

    `_rhs_cache` only memoizes bound evaluators per mass.
    """

    field_program: StencilProgram | None = None
    particle_program: StencilProgram | None = None
    constants: Mapping[str, float] = field(default_factory=dict)
    dt: float = 0.0
    mode: str = CORRECTED
    c: float = DEFAULT_C
    potential_gradient: Callable[[float], float] | None = None
    interaction: InteractionSettings = field(default_factory=InteractionSettings)
    norm_factor: float = NORM_DIVERGENCE_FACTOR
    _rhs_cache: dict = field(default_factory=dict, repr=False)

    def particle_rhs(self, mass: float) -> BoundPolynomial | None:
        """ẍ evaluator with `m` bound to the particle's mass (cached per mass)."""
        if self.particle_program is None or mass == 0:
            return None
        bound = self._rhs_cache.get(mass)
        if bound is None:
            bound = self.particle_program.bind({**self.constants, "m": mass})
            self._rhs_cache[mass] = bound
        return bound


@dataclass(frozen=True, eq=False)
class SystemState:
    """One instant of the automaton.

    `rng` belongs to this state alone: tick and the interaction steps draw
    from a copy, so an earlier state can be run again with the same draws.
    """

    grid: CellGrid | None
    fields: Mapping[str, FieldState]
    particles: Mapping[str, ParticleWave]
    dynamics: Dynamics
    rng: GeneratorState
    tick: int = 0
    t: float = 0.0
    occupancy: Mapping[int, frozenset[str]] = field(default_factory=dict)
    next_id: int = 0
    events: tuple[InteractionEvent, ...] = ()

    def object(self, object_id: str) -> PhysicalObject:
        if object_id in self.fields:
            return self.fields[object_id]
        if object_id in self.particles:
            return self.particles[object_id]
        raise UnknownObjectError(f"no object with id '{object_id}'")

    def object_ids(self) -> list[str]:
        return sorted(self.fields) + sorted(self.particles)


# ---------------------------------------------------------------------------
# Occupancy
# ---------------------------------------------------------------------------
def cell_weights(obj: PhysicalObject, grid: CellGrid, threshold: float) -> dict[int, float]:
    """Per covered cell: |ψ|² for a field, Σ|amplitude|² of covering paths for a particle."""
    if isinstance(obj, FieldState):
        flat = np.abs(obj.psi).ravel()
        cells = np.flatnonzero(flat > threshold)
        return {int(c): float(flat[c] ** 2) for c in cells}

    weights: dict[int, float] = defaultdict(float)
    for row, member in zip(obj.paths.rows, obj.members()):
        if abs(row.amplitude) > threshold:
            weights[grid.cell_of(member.x)] += abs(row.amplitude) ** 2
    return dict(weights)


def map_object_to_cells(object_id: str, state: SystemState) -> frozenset[int]:
    obj = state.object(object_id)
    if state.grid is None:
        return frozenset()
    threshold = state.dynamics.interaction.occupancy_threshold
    return frozenset(cell_weights(obj, state.grid, threshold))


def objects_at_cell(cell: int, state: SystemState) -> frozenset[str]:
    if state.grid is None or not 0 <= cell < state.grid.size:
        raise UnknownObjectError(f"cell {cell} is not on the grid")
    return state.occupancy.get(cell, frozenset())


def build_occupancy(
    grid: CellGrid | None,
    fields: Mapping[str, FieldState],
    particles: Mapping[str, ParticleWave],
    threshold: float,
) -> dict[int, frozenset[str]]:
    if grid is None:
        return {}
    index: dict[int, set[str]] = defaultdict(set)
    for object_id, obj in [*fields.items(), *particles.items()]:
        for cell in cell_weights(obj, grid, threshold):
            index[cell].add(object_id)
    return {cell: frozenset(ids) for cell, ids in sorted(index.items())}


def occupancy_is_consistent(state: SystemState) -> bool:
    """Exhaustive check that the cell index is the inverse of the object mapping."""
    forward = {oid: map_object_to_cells(oid, state) for oid in state.object_ids()}
    for cell, ids in state.occupancy.items():
        if not ids or any(cell not in forward.get(oid, ()) for oid in ids):
            return False
    return all(oid in state.occupancy.get(cell, ()) for oid, cells in forward.items() for cell in cells)


def total_norm(state: SystemState) -> float:
    """Largest field norm; used by the all-fields-below stop predicate."""
    if state.grid is None or not state.fields:
        return 0.0
    return max((f.norm(state.grid.dx) for f in state.fields.values()), default=0.0)


def is_finite_state(state: SystemState) -> bool:
    return all(np.isfinite(f.psi).all() for f in state.fields.values()) and all(
        math.isfinite(m.x) for pw in state.particles.values() for m in pw.members()
    )
