"""
Scenario → initial SystemState.

Derives the equation of motion, compiles its stencil, binds constants per
object and fills the lookback slices each stencil family needs.
"""
from __future__ import annotations

import logging
import math
from collections.abc import Mapping
from dataclasses import replace

import numpy as np

from lagrange_ca.config import (
    DEFAULT_C,
    DEFAULT_CFL,
    DEFAULT_HBAR,
    DEFAULT_SCHRODINGER_RATIO,
    PARTICLE_MASSES,
)
from lagrange_ca.dsl.euler_lagrange import FIELD, PARTICLE, EquationOfMotion, euler_lagrange, parse_equation
from lagrange_ca.dsl.parser import parse
from lagrange_ca.engine.grid import CellGrid
from lagrange_ca.engine.kinematics import momentum_of
from lagrange_ca.engine.objects import FieldState, ParticleWave, PathMember, PathRow, PwCollection
from lagrange_ca.engine.profiles import build_profile, potential_gradient, previous_slice, sample_potential
from lagrange_ca.engine.rng import GeneratorState
from lagrange_ca.engine.state import Dynamics, SystemState, build_occupancy
from lagrange_ca.errors import ContractViolation, UnknownParticleTypeError
from lagrange_ca.interaction.rules import canonical_type
from lagrange_ca.interaction.settings import InteractionSettings
from lagrange_ca.scenario.models import FieldSpec, ParticleSpec, PotentialSpec, Scenario
from lagrange_ca.stencils.program import FIELD_1ST_T, FIELD_2ND_T, StencilProgram, compile_stencil
from lagrange_ca.stencils.wave import field_bindings

logger = logging.getLogger(__name__)

FREE_PARTICLE = "d2(x,t) = 0"
POTENTIAL_PARTICLE = "d2(x,t) = -1/m*d(V,x)"
POTENTIAL_KEYS = frozenset({"V", "d(V,x)"})


def declared_constants(scenario: Scenario) -> list[str]:
    names = set(scenario.constants)
    for spec in scenario.fields:
        names.update(spec.params)
    return sorted(names)


def derive_equation(scenario: Scenario) -> EquationOfMotion:
    """The scenario's equation of motion, from its Lagrangian or given directly."""
    constants = declared_constants(scenario)
    if scenario.lagrangian.source is not None:
        return euler_lagrange(parse(scenario.lagrangian.source, constants))
    return parse_equation(scenario.lagrangian.eom, constants)


def base_constants(scenario: Scenario) -> dict[str, float]:
    return {"hbar": DEFAULT_HBAR, "c": DEFAULT_C, **scenario.constants}


def effective_potential(scenario: Scenario) -> PotentialSpec | None:
    """The [potential] section, or V = -F·x from a declared constant F."""
    if scenario.potential is not None:
        return scenario.potential
    if "F" in scenario.constants:
        return PotentialSpec(kind="constant_force", strength=scenario.constants["F"])
    return None


def uses_potential(eom: EquationOfMotion) -> bool:
    return bool(eom.polynomial.keys() & POTENTIAL_KEYS)


def field_constants(scenario: Scenario, spec: FieldSpec) -> dict[str, float]:
    values = {**base_constants(scenario), **spec.params}
    if spec.mass is not None:
        values["m"] = spec.mass
    return values


def particle_mass(scenario: Scenario, spec: ParticleSpec) -> float:
    if spec.mass is not None:
        return spec.mass
    if spec.type == "generic":
        return scenario.constants.get("m", PARTICLE_MASSES["generic"])
    return PARTICLE_MASSES[resolve_type(spec.type)]


def resolve_type(name: str) -> str:
    if name == "generic":
        return name
    try:
        return canonical_type(name)
    except UnknownParticleTypeError:
        if name in PARTICLE_MASSES:
            return name
        raise


def wave_speed(program: StencilProgram, values: Mapping[str, float]) -> float:
    """√(coefficient of Δ²ψdx) for second-order fields; 0 when there is none."""
    coefficient = program.laplacian_coefficient(values)
    return math.sqrt(abs(coefficient.real)) if coefficient.real > 0 else 0.0


def resolve_timestep(scenario: Scenario, eom: EquationOfMotion) -> float | None:
    """Declared Δt, else the default picked from the stability guard; None if undetermined."""
    if scenario.run.dt is not None:
        return scenario.run.dt
    if eom.kind != FIELD or scenario.grid is None or not scenario.fields:
        return None
    program = compile_stencil(eom)
    dx = scenario.grid.dx
    dims = len(scenario.grid.extent)
    steps = []
    for spec in scenario.fields:
        values = field_constants(scenario, spec)
        if program.family == FIELD_2ND_T:
            speed = wave_speed(program, values)
            if speed > 0:
                steps.append(DEFAULT_CFL * dx / (speed * math.sqrt(dims)))
        else:
            coefficient = abs(program.laplacian_coefficient(values))
            if coefficient > 0:
                steps.append(DEFAULT_SCHRODINGER_RATIO * dx**2 / coefficient)
    return min(steps) if steps else None


def interaction_settings(scenario: Scenario) -> InteractionSettings:
    spec = scenario.interaction
    if spec is None:
        return InteractionSettings()
    signs = []
    for key, sign in sorted(spec.signs.items()):
        first, second = sorted(int(part) for part in key.split(":"))
        signs.append(((first, second), sign))
    return InteractionSettings(
        enabled=spec.enabled,
        pairs=tuple(tuple(pair) for pair in spec.pairs),
        rule_table=spec.rules,
        granularity=spec.granularity,
        window=spec.window_fraction,
        coupling=spec.coupling,
        signs=tuple(signs),
        equivalence=spec.equivalence,
        occupancy_threshold=spec.occupancy_threshold,
        prune_threshold=spec.prune_threshold,
    )


# ---------------------------------------------------------------------------
# Objects
# ---------------------------------------------------------------------------
def init_field(
    scenario: Scenario,
    spec: FieldSpec,
    program: StencilProgram,
    grid: CellGrid,
    dt: float,
) -> FieldState:
    values = field_constants(scenario, spec)
    try:
        rhs = program.bind(values)
    except KeyError as exc:
        raise ContractViolation(f"field '{spec.id}': constant {exc.args[0]} has no value")

    psi = build_profile(spec, grid)
    potential = sample_potential(effective_potential(scenario), grid)
    ptype = resolve_type(spec.type)
    mass = values.get("m", PARTICLE_MASSES.get(ptype, 1.0))
    source = None
    if spec.source:
        if len(spec.source) != 2:
            raise ContractViolation(f"field '{spec.id}': a source term names two fields")
        source = (spec.source[0], spec.source[1], spec.source_coupling)

    prev = rate = None
    if program.family == FIELD_2ND_T:
        prev = previous_slice(spec, grid, psi, dt, wave_speed(program, values))
    elif program.family == FIELD_1ST_T:
        rate = np.broadcast_to(
            rhs(field_bindings(psi, grid.dx, grid.boundary, potential)), psi.shape
        ).astype(complex)

    initial = FieldState(
        id=spec.id, family=program.family, psi=psi, rhs=rhs, prev=prev, rate=rate,
        potential=potential, params=values, ptype=ptype, spin=spec.spin, mass=mass, source=source,
    )
    return replace(initial, initial_norm=initial.norm(grid.dx))


def init_particle(scenario: Scenario, spec: ParticleSpec, c: float) -> ParticleWave:
    ptype = resolve_type(spec.type)
    mass = particle_mass(scenario, spec)
    if spec.velocity is not None:
        p = momentum_of(spec.velocity, mass, spec.relativistic, c) if mass > 0 else math.copysign(1.0, spec.velocity)
    else:
        p = spec.momentum or 0.0

    n = spec.paths
    offsets = [0.0] if n == 1 else [spec.spread * (j / (n - 1) - 0.5) for j in range(n)]
    momenta = spec.path_momenta or [p] * n
    amplitude = 1.0 / math.sqrt(n)
    rows = tuple(
        PathRow((PathMember(ptype, spec.x + dx, float(pj), spec.spin, 0.0),), amplitude)
        for dx, pj in zip(offsets, momenta)
    )
    return ParticleWave(spec.id, ptype, mass, PwCollection(rows), relativistic=spec.relativistic)


def init_state(scenario: Scenario, eom: EquationOfMotion | None = None, dt: float | None = None) -> SystemState:
    """Allocate the grid, place every object and bind the dynamics."""
    eom = eom or derive_equation(scenario)
    program = compile_stencil(eom)
    dt = dt if dt is not None else resolve_timestep(scenario, eom)
    if dt is None:
        raise ContractViolation("run.dt is required for this scenario")

    grid = None
    if scenario.grid is not None:
        g = scenario.grid
        grid = CellGrid(tuple(g.extent), g.dx, g.boundary)

    constants = base_constants(scenario)
    c = constants.get("c", DEFAULT_C)

    if eom.kind == PARTICLE:
        field_program, particle_program = None, program
    else:
        field_program = program
        rule = POTENTIAL_PARTICLE if scenario.potential is not None else FREE_PARTICLE
        particle_program = compile_stencil(parse_equation(rule))

    if scenario.fields and field_program is None:
        raise ContractViolation("fields need a field equation of motion")
    fields = {spec.id: init_field(scenario, spec, field_program, grid, dt) for spec in scenario.fields}
    for f in fields.values():
        if f.source is not None and not set(f.source[:2]) <= fields.keys():
            raise ContractViolation(f"field '{f.id}': source names an unknown field")
    particles = {spec.id: init_particle(scenario, spec, c) for spec in scenario.particles}

    settings = interaction_settings(scenario)
    dynamics = Dynamics(
        field_program=field_program,
        particle_program=particle_program,
        constants=constants,
        dt=dt,
        mode=scenario.run.mode,
        c=c,
        potential_gradient=potential_gradient(effective_potential(scenario)),
        interaction=settings,
    )
    state = SystemState(
        grid=grid,
        fields=fields,
        particles=particles,
        dynamics=dynamics,
        rng=GeneratorState.from_seed(scenario.run.seed),
        occupancy=build_occupancy(grid, fields, particles, settings.occupancy_threshold),
    )
    logger.info(
        "Initial state: %s stencil, %d field(s), %d particle(s), dt=%g",
        program.family, len(fields), len(particles), dt,
    )
    return state
