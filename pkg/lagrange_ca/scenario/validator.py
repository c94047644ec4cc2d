"""Static checks on a loaded scenario against its equation of motion."""
from __future__ import annotations

import logging
import math

from lagrange_ca.config import CFL_LIMIT, SCHRODINGER_WARN_RATIO
from lagrange_ca.dsl.euler_lagrange import FIELD, PARTICLE, EquationOfMotion
from lagrange_ca.engine.setup import (
    base_constants,
    effective_potential,
    field_constants,
    particle_mass,
    resolve_timestep,
    resolve_type,
    uses_potential,
    wave_speed,
)
from lagrange_ca.errors import Diagnostic, InputError, NoTemplateError
from lagrange_ca.interaction.rules import rule_table, vocabulary
from lagrange_ca.scenario.models import Scenario
from lagrange_ca.stencils.program import FIELD_1ST_T, FIELD_2ND_T, compile_stencil

logger = logging.getLogger(__name__)

ERROR = "error"
WARNING = "warning"


class _Collector:
    def __init__(self, scenario: Scenario):
        self.scenario = scenario
        self.items: list[Diagnostic] = []

    def add(self, level: str, message: str, key: str = "") -> None:
        file, line = self.scenario.where(key) if key else (self.scenario.path, 0)
        self.items.append(Diagnostic(level, message, file, line))

    def error(self, message: str, key: str = "") -> None:
        self.add(ERROR, message, key)

    def warning(self, message: str, key: str = "") -> None:
        self.add(WARNING, message, key)


def _check_bindings(out: _Collector, s: Scenario, eom: EquationOfMotion) -> None:
    base = base_constants(s)
    if uses_potential(eom) and effective_potential(s) is None:
        key = "lagrangian.source" if s.lagrangian.source is not None else "lagrangian.eom"
        out.error("the equation uses V but there is no [potential] section or constant F", key)
    if eom.kind == PARTICLE:
        for name in eom.constants:
            if name != "m" and name not in base:
                out.error(f"constant '{name}' used by the equation of motion has no value", "lagrangian.source")
        return
    for spec in s.fields:
        values = field_constants(s, spec)
        for name in eom.constants:
            if name not in values:
                out.error(f"field '{spec.id}': constant '{name}' has no value", f"field {spec.id}.profile")


def _check_stability(out: _Collector, s: Scenario, eom: EquationOfMotion, dt: float) -> None:
    if eom.kind != FIELD or s.grid is None:
        return
    program = compile_stencil(eom)
    dx = s.grid.dx
    dims = len(s.grid.extent)
    for spec in s.fields:
        values = field_constants(s, spec)
        if program.family == FIELD_2ND_T:
            speed = wave_speed(program, values)
            courant = speed * dt * math.sqrt(dims) / dx
            if courant > CFL_LIMIT:
                message = f"field '{spec.id}': CFL number {courant:.4g} exceeds {CFL_LIMIT:g}"
                if s.run.allow_unstable:
                    out.warning(message + " (allowed)", "run.dt")
                else:
                    out.error(message, "run.dt")
            if spec.init != "rest" and speed == 0:
                out.error(f"field '{spec.id}': init '{spec.init}' needs a wave speed", f"field {spec.id}.init")
            if spec.source:
                for ref in spec.source:
                    if ref not in {f.id for f in s.fields}:
                        out.error(f"field '{spec.id}': source names unknown field '{ref}'", f"field {spec.id}.source")
                if len(spec.source) != 2:
                    out.error(f"field '{spec.id}': a source term names two fields", f"field {spec.id}.source")
        elif program.family == FIELD_1ST_T:
            ratio = abs(program.laplacian_coefficient(values)) * dt / dx**2
            if ratio > SCHRODINGER_WARN_RATIO:
                out.warning(
                    f"field '{spec.id}': ħΔt/(2mΔx²) = {ratio:.4g} above {SCHRODINGER_WARN_RATIO:g}; "
                    "the explicit update may grow the norm",
                    "run.dt",
                )
            if spec.source:
                out.error(f"field '{spec.id}': source terms need a second-order field", f"field {spec.id}.source")


def _check_objects(out: _Collector, s: Scenario, eom: EquationOfMotion) -> None:
    if eom.kind == PARTICLE and s.fields:
        out.error("field sections need a field equation of motion", f"field {s.fields[0].id}.profile")
    if eom.kind == FIELD and not s.fields:
        out.warning("field equation of motion but no [field] section")

    for spec in s.fields:
        if spec.profile == "impulse" and s.grid is not None and spec.cell >= math.prod(s.grid.extent):
            out.error(f"field '{spec.id}': impulse cell {spec.cell} is outside the grid", f"field {spec.id}.cell")
        if spec.profile == "eigenmode" and s.grid is not None and s.grid.boundary != "fixed":
            out.warning(f"field '{spec.id}': eigenmode profile assumes fixed boundaries", f"field {spec.id}.profile")
        try:
            resolve_type(spec.type)
        except InputError as exc:
            out.error(f"field '{spec.id}': {exc}", f"field {spec.id}.type")

    c = base_constants(s).get("c", 1.0)
    for spec in s.particles:
        label = f"particle {spec.id}"
        if s.grid is not None and len(s.grid.extent) != 1:
            out.error(f"particle '{spec.id}': particles need a one-dimensional grid", "grid.extent")
        try:
            resolve_type(spec.type)
            mass = particle_mass(s, spec)
        except InputError as exc:
            out.error(f"particle '{spec.id}': {exc}", f"{label}.type")
            continue
        if mass == 0 and spec.relativistic:
            out.error(f"particle '{spec.id}': massless particles cannot use proper time", f"{label}.relativistic")
        if spec.relativistic and spec.velocity is not None and abs(spec.velocity) >= c:
            out.error(f"particle '{spec.id}': speed must stay below c", f"{label}.velocity")


def _check_interaction(out: _Collector, s: Scenario) -> None:
    spec = s.interaction
    if spec is None or not spec.enabled:
        return
    ids = s.object_ids()
    types = {f.id: f.type for f in s.fields} | {p.id: p.type for p in s.particles}
    known = vocabulary(rule_table(spec.rules))
    for first, second in spec.pairs:
        for ref in (first, second):
            if ref not in ids:
                out.error(f"interaction pair {first}:{second} names unknown object '{ref}'", "interaction.pairs")
                continue
            try:
                ptype = resolve_type(types[ref])
            except InputError:
                continue
            if ptype not in known:
                out.error(
                    f"object '{ref}' has type '{ptype}', not in rule table '{spec.rules}'",
                    "interaction.pairs",
                )
        if first == second:
            out.error(f"interaction pair {first}:{second} pairs an object with itself", "interaction.pairs")
    if not spec.pairs:
        out.warning("no interaction pairs declared; every object pair is eligible", "interaction.enabled")
        for ref in ids:
            try:
                ptype = resolve_type(types[ref])
            except InputError:
                continue
            if ptype not in known:
                out.warning(
                    f"object '{ref}' has type '{ptype}', not in rule table '{spec.rules}'; it will not interact",
                    "interaction.enabled",
                )


def validate_scenario(scenario: Scenario, eom: EquationOfMotion) -> list[Diagnostic]:
    """Errors and warnings, each carrying the file/line of the value involved."""
    out = _Collector(scenario)
    out.items.extend(scenario.warnings)
    try:
        compile_stencil(eom)
    except NoTemplateError as exc:
        out.error(str(exc), "lagrangian.source")
        return out.items

    _check_bindings(out, scenario, eom)
    dt = resolve_timestep(scenario, eom)
    if dt is None:
        out.error("run.dt is required for this scenario", "run.dt")
    else:
        _check_stability(out, scenario, eom, dt)
    run = scenario.run
    if run.ticks is None and run.max_time is None and run.stop_below is None:
        out.error("run needs ticks, max_time or stop_below", "run.ticks")
    _check_objects(out, scenario, eom)
    _check_interaction(out, scenario)

    for item in out.items:
        if item.level == ERROR:
            logger.debug("%s", item)
    return out.items


def has_errors(diagnostics: list[Diagnostic]) -> bool:
    return any(d.level == ERROR for d in diagnostics)
