"""
Derivation service: Lagrangian text → equation of motion and stencil.

Provides:
  - derive_from_source()    – parse a Lagrangian (or an equation given directly)
  - derive_from_scenario()  – derive using the constants a scenario declares
  - derivation_report()     – plain-text lines for the CLI

Results are cached per input text; parsing is pure so identical input
always yields the identical result. Callers get their own copy.
"""
from __future__ import annotations

import copy
import hashlib
import logging
from collections import OrderedDict

from lagrange_ca.dsl import (
    FIELD,
    check_density_requirements,
    euler_lagrange,
    format_equation,
    parse,
    parse_equation,
)
from lagrange_ca.engine.setup import declared_constants
from lagrange_ca.scenario.loader import parse_scenario_text
from lagrange_ca.stencils.program import compile_stencil

logger = logging.getLogger(__name__)

# ---------------------------------------------------------------------------
# Small LRU cache of derivation results
# ---------------------------------------------------------------------------
_CACHE_MAX = 64
_cache: OrderedDict[str, dict] = OrderedDict()


def _cache_key(*parts: str) -> str:
    raw = "\x00".join(parts)
    return hashlib.sha256(raw.encode("utf-8")).hexdigest()[:16]


def _cache_get(key: str) -> dict | None:
    if key in _cache:
        _cache.move_to_end(key)
        return copy.deepcopy(_cache[key])
    return None


def _cache_put(key: str, value: dict) -> None:
    _cache[key] = value
    if len(_cache) > _CACHE_MAX:
        _cache.popitem(last=False)


# ---------------------------------------------------------------------------
# Public API
# ---------------------------------------------------------------------------
def derive_from_source(source: str, constants: list[str] | tuple[str, ...] = (), *, is_equation: bool = False) -> dict:
    """
    Derive the equation of motion and its stencil program.

    `is_equation` marks the source as an equation of motion already
    (`d(psi,t) = ...`); no density report is produced then.

    Raises InputError subclasses for bad input.
    """
    key = _cache_key(source, ",".join(sorted(constants)), str(is_equation))
    cached = _cache_get(key)
    if cached is not None:
        logger.info("[Derive] Cache hit")
        return cached

    density = None
    if is_equation:
        eom = parse_equation(source, constants)
    else:
        tree = parse(source, constants)
        eom = euler_lagrange(tree)
        if eom.kind == FIELD:
            density = check_density_requirements(tree)
    program = compile_stencil(eom)

    result = {
        "eom": format_equation(eom),
        "kind": eom.kind,
        "family": program.family,
        "parameters": [{"name": name, "unit": unit} for name, unit in eom.parameters],
        "steps": program.describe(),
        "density_report": density.lines() if density is not None else None,
    }
    logger.info("[Derive] %s → %s", eom.solved_for, program.family)
    _cache_put(key, result)
    return copy.deepcopy(result)


def derive_from_scenario(text: str, name: str = "<scenario>") -> dict:
    """Derive from the [lagrangian] section of scenario text."""
    scenario = parse_scenario_text(text, name)
    lagrangian = scenario.lagrangian
    if lagrangian.source is not None:
        return derive_from_source(lagrangian.source, declared_constants(scenario))
    return derive_from_source(lagrangian.eom, declared_constants(scenario), is_equation=True)


def derivation_report(result: dict) -> list[str]:
    lines = [result["eom"], f"stencil: {result['family']}"]
    lines.extend(f"  {step}" for step in result["steps"])
    if result["parameters"]:
        lines.append("parameters: " + ", ".join(f"{p['name']} [{p['unit']}]" for p in result["parameters"]))
    if result["density_report"]:
        lines.extend(result["density_report"])
    return lines
