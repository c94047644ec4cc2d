"""
Global update function and the run loop.

One tick:
  1. advance every field from its stored slices (reads only the old state)
  2. advance every particle wave by its proper-time step
  3. rebuild the occupancy index
  4. process at most one interaction
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace
from typing import Any

import numpy as np

from lagrange_ca.engine.kinematics import proper_timestep, velocity_of
from lagrange_ca.engine.objects import FieldState, ParticleWave
from lagrange_ca.engine.record import ParticleSample, RunRecord, Snapshot
from lagrange_ca.engine.state import SystemState, build_occupancy, total_norm
from lagrange_ca.errors import InputError, NormDivergenceError, NumericalInstabilityError, SimulationError
from lagrange_ca.interaction.pipeline import interact
from lagrange_ca.stencils.program import FIELD_1ST_T, FIELD_2ND_T
from lagrange_ca.stencils.particle import particle_step
from lagrange_ca.stencils.schrodinger import schrodinger_step
from lagrange_ca.stencils.wave import wave_step

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class StopCondition:
    max_ticks: int | None = None
    max_time: float | None = None
    below: float | None = None

    def __post_init__(self):
        if self.max_ticks is None and self.max_time is None and self.below is None:
            raise InputError("a run needs max_ticks, max_time or a field threshold to stop")

    def reached(self, state: SystemState) -> bool:
        if self.max_ticks is not None and state.tick >= self.max_ticks:
            return True
        if self.max_time is not None and state.t >= self.max_time - 0.5 * state.dynamics.dt:
            return True
        if self.below is not None and state.fields and total_norm(state) < self.below:
            return True
        return False


# ---------------------------------------------------------------------------
# Fields
# ---------------------------------------------------------------------------
def _source_term(state: SystemState, f: FieldState) -> np.ndarray | None:
    if f.source is None:
        return None
    first, second, coupling = f.source
    return coupling * state.fields[first].psi * state.fields[second].psi


def _advance_field(state: SystemState, f: FieldState, dt: float, tick: int) -> FieldState:
    grid = state.grid
    if f.family == FIELD_2ND_T:
        psi = wave_step(
            f.psi, f.prev, dt, f.rhs, grid.dx, grid.boundary,
            potential=f.potential, source=_source_term(state, f),
        )
        updated = replace(f, psi=np.broadcast_to(psi, f.psi.shape).astype(complex), prev=f.psi)
    elif f.family == FIELD_1ST_T:
        psi, rate = schrodinger_step(
            f.psi, f.rate, dt, f.rhs, grid.dx, grid.boundary,
            mode=state.dynamics.mode, potential=f.potential,
        )
        updated = replace(f, psi=psi, rate=rate)
    else:
        raise SimulationError(f"field '{f.id}' has no field stencil ({f.family})")

    bad = np.flatnonzero(~np.isfinite(updated.psi.ravel()))
    if bad.size:
        raise NumericalInstabilityError(f.id, int(bad[0]), tick)
    if f.family == FIELD_1ST_T and f.initial_norm > 0:
        norm = updated.norm(grid.dx)
        limit = state.dynamics.norm_factor * f.initial_norm
        if norm > limit:
            raise NormDivergenceError(f.id, norm, limit, tick)
    return updated


# ---------------------------------------------------------------------------
# Particles
# ---------------------------------------------------------------------------
def _advance_particle(state: SystemState, pw: ParticleWave, dt: float, t: float) -> ParticleWave:
    dynamics = state.dynamics
    dtau = proper_timestep(pw.expected_momentum(), pw.mass, dt, pw.relativistic, dynamics.c)
    moved = particle_step(
        pw,
        dtau,
        dynamics.particle_rhs(pw.mass),
        potential_gradient=dynamics.potential_gradient,
        confine=state.grid.confine if state.grid is not None else None,
        c=dynamics.c,
        t=t,
    )
    if not all(math.isfinite(m.x) and math.isfinite(float(m.p)) for m in moved.members()):
        params = ", ".join(f"{k}={v}" for k, v in sorted(dynamics.constants.items()))
        logger.error("Particle '%s' left the finite range (m=%s; %s)", pw.id, pw.mass, params)
        raise NumericalInstabilityError(pw.id, -1, state.tick + 1)
    return moved


def _advance_particles(state: SystemState, dt: float, t: float) -> dict[str, ParticleWave]:
    """Partners sharing one path table move together: each reads the other's update."""
    moved: dict[str, ParticleWave] = {}
    for pid in sorted(state.particles):
        if pid in moved:
            continue
        pw = _advance_particle(state, state.particles[pid], dt, t)
        partner_id = pw.partner
        if partner_id is not None and partner_id in state.particles and partner_id not in moved:
            partner = replace(state.particles[partner_id], paths=pw.paths)
            partner = _advance_particle(state, partner, dt, t)
            pw = replace(pw, paths=partner.paths)
            moved[partner_id] = partner
        moved[pid] = pw
    return moved


# ---------------------------------------------------------------------------
# Tick and run
# ---------------------------------------------------------------------------
def tick(state: SystemState, dt: float | None = None) -> SystemState:
    """Global update: a new state one Δt later; `state` is left untouched."""
    dt = state.dynamics.dt if dt is None else dt
    if not dt > 0:
        raise InputError("time step must be positive")
    next_tick = state.tick + 1
    t = state.t + dt

    fields = {fid: _advance_field(state, state.fields[fid], dt, next_tick) for fid in sorted(state.fields)}
    particles = _advance_particles(state, dt, t)

    settings = state.dynamics.interaction
    new_state = replace(
        state,
        fields=fields,
        particles=particles,
        rng=state.rng.copy(),
        tick=next_tick,
        t=t,
        occupancy=build_occupancy(state.grid, fields, particles, settings.occupancy_threshold),
    )
    if settings.enabled:
        new_state = interact(new_state)
    return new_state


def capture_snapshot(state: SystemState) -> Snapshot:
    c = state.dynamics.c
    particles = {}
    for pid, pw in sorted(state.particles.items()):
        p = pw.expected_momentum()
        particles[pid] = ParticleSample(
            pid,
            pw.ptype,
            tuple(pw.members()),
            tuple(row.amplitude for row in pw.paths.rows),
            pw.expected_position(),
            p,
            velocity_of(p, pw.mass, pw.relativistic, c),
            pw.tau,
        )
    fields = {fid: f.psi for fid, f in sorted(state.fields.items())}
    return Snapshot(state.tick, state.t, fields, particles)


def run(
    state: SystemState,
    until: StopCondition,
    snapshot_every: int = 1,
    *,
    digest: str = "",
    flags: dict[str, Any] | None = None,
    overrides: dict[str, Any] | None = None,
) -> RunRecord:
    """Tick until the stop condition holds, keeping every `snapshot_every`-th state."""
    if snapshot_every < 1:
        raise InputError("snapshot cadence must be at least 1")
    snapshots = [capture_snapshot(state)]
    logger.info("Run started: %d object(s), dt=%g", len(state.object_ids()), state.dynamics.dt)

    while not until.reached(state):
        try:
            state = tick(state)
        except SimulationError as exc:
            exc.tick = state.tick + 1
            logger.error("Run aborted at tick %d: %s", exc.tick, exc)
            raise
        if state.tick % snapshot_every == 0:
            snapshots.append(capture_snapshot(state))

    logger.info("Run finished: %d tick(s), t=%g, %d event(s)", state.tick, state.t, len(state.events))
    return RunRecord(
        digest=digest,
        seed=state.rng.seed,
        flags=dict(flags or {}),
        snapshots=tuple(snapshots),
        events=state.events,
        final=state,
        rng=state.rng.export(),
        overrides=dict(overrides or {}),
    )
