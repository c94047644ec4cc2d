"""
Run service: scenario → validated initial state → RunRecord.

Provides:
  - apply_overrides()     – fold CLI/API overrides into the [run] section
  - check_scenario()      – derive + validate, returning diagnostics
  - run_scenario()        – the full pipeline for a loaded scenario
  - run_scenario_text()   – same, from text, summarised for the HTTP API

Pipeline: overrides → derive → validate → init → tick loop → write outputs.
"""
from __future__ import annotations

import logging
import time
from dataclasses import asdict
from pathlib import Path
from typing import Any

from lagrange_ca.dsl import EquationOfMotion
from lagrange_ca.engine.loop import StopCondition, run
from lagrange_ca.engine.record import RunRecord
from lagrange_ca.engine.setup import derive_equation, init_state, resolve_timestep
from lagrange_ca.errors import Diagnostic, InputError, ScenarioError
from lagrange_ca.scenario.loader import parse_scenario_text
from lagrange_ca.scenario.models import RunSpec, Scenario
from lagrange_ca.scenario.validator import ERROR, has_errors, validate_scenario
from lagrange_ca.scenario.writer import write_record

logger = logging.getLogger(__name__)

OVERRIDE_KEYS = ("seed", "ticks", "max_time", "snapshot_every", "mode", "allow_unstable")


# ---------------------------------------------------------------------------
# Helpers
# ---------------------------------------------------------------------------
def apply_overrides(scenario: Scenario, overrides: dict[str, Any] | None) -> Scenario:
    """A copy of `scenario` with [run] keys replaced; None values are ignored."""
    updates = {k: v for k, v in (overrides or {}).items() if v is not None}
    unknown = sorted(set(updates) - set(OVERRIDE_KEYS))
    if unknown:
        raise InputError(f"unknown override(s): {', '.join(unknown)}")
    if not updates:
        return scenario
    run_spec = RunSpec.model_validate({**scenario.run.model_dump(), **updates})
    return scenario.model_copy(update={"run": run_spec})


def _as_dict(diagnostic: Diagnostic) -> dict:
    return asdict(diagnostic)


def check_scenario(scenario: Scenario) -> tuple[EquationOfMotion | None, list[Diagnostic]]:
    """Derive the equation of motion and collect every diagnostic."""
    try:
        eom = derive_equation(scenario)
    except InputError as exc:
        file, line = scenario.where("lagrangian.source")
        if not line:
            file, line = scenario.where("lagrangian.eom")
        return None, [*scenario.warnings, Diagnostic(ERROR, str(exc), file, line)]
    return eom, validate_scenario(scenario, eom)


def validate_text(text: str, name: str = "<scenario>") -> dict:
    try:
        scenario = parse_scenario_text(text, name)
    except ScenarioError as exc:
        return {"ok": False, "diagnostics": [_as_dict(d) for d in exc.diagnostics]}
    _, diagnostics = check_scenario(scenario)
    return {"ok": not has_errors(diagnostics), "diagnostics": [_as_dict(d) for d in diagnostics]}


# ---------------------------------------------------------------------------
# Running
# ---------------------------------------------------------------------------
def run_scenario(
    scenario: Scenario,
    overrides: dict[str, Any] | None = None,
    out_dir: str | Path | None = None,
) -> RunRecord:
    """
    Validate and run a loaded scenario.

    Raises ScenarioError when validation reports errors and
    SimulationError when the run aborts. Warnings are logged.
    """
    scenario = apply_overrides(scenario, overrides)
    eom, diagnostics = check_scenario(scenario)
    for item in diagnostics:
        if item.level != ERROR:
            logger.warning("[Run] %s", item)
    if eom is None or has_errors(diagnostics):
        raise ScenarioError([d for d in diagnostics if d.level == ERROR])

    dt = resolve_timestep(scenario, eom)
    state = init_state(scenario, eom, dt)
    spec = scenario.run
    until = StopCondition(spec.ticks, spec.max_time, spec.stop_below)
    flags = {
        "mode": spec.mode,
        "allow_unstable": spec.allow_unstable,
        "dt": dt,
        "interaction": scenario.interaction.model_dump(mode="json") if scenario.interaction else None,
    }

    t0 = time.perf_counter()
    record = run(
        state,
        until,
        spec.snapshot_every,
        digest=scenario.digest,
        flags=flags,
        overrides={k: v for k, v in (overrides or {}).items() if v is not None},
    )
    logger.info(
        "[Run] %s: %d tick(s), %d event(s) in %.2fs",
        scenario.path or "<scenario>", record.ticks, len(record.events), time.perf_counter() - t0,
    )
    if out_dir is not None:
        write_record(record, out_dir)
    return record


def run_scenario_text(text: str, overrides: dict[str, Any] | None = None, name: str = "<scenario>") -> dict:
    """Run scenario text and return the record summary plus its event log."""
    record = run_scenario(parse_scenario_text(text, name), overrides)
    return {
        "digest": record.digest,
        "seed": record.seed,
        "overrides": record.overrides,
        "summary": record.summary(),
        "events": [asdict(event) for event in record.events],
    }
