"""
Scenario file reader.

Format: `[section]` headers, `key = value` lines, `#` comments. Indented
lines continue the previous value (multi-line Lagrangians). Every value
keeps the (file, line) it came from.
"""
from __future__ import annotations

import hashlib
import logging
import re
from pathlib import Path
from typing import Any

from pydantic import ValidationError

from lagrange_ca.dsl.expr import DEFAULT_CONSTANTS
from lagrange_ca.errors import Diagnostic, ScenarioError
from lagrange_ca.scenario.models import (
    FieldSpec,
    GridSpec,
    InteractionSpec,
    LagrangianSpec,
    ParticleSpec,
    PotentialSpec,
    RunSpec,
    Scenario,
)

logger = logging.getLogger(__name__)

_SECTION = re.compile(r"^\[\s*([a-z]+)(?:\s+([A-Za-z0-9_]+))?\s*\]$")
_ENTRY = re.compile(r"^([A-Za-z_][A-Za-z0-9_]*)\s*=\s*(.*)$")

SINGLE_SECTIONS = {
    "lagrangian": LagrangianSpec,
    "constants": None,
    "grid": GridSpec,
    "run": RunSpec,
    "potential": PotentialSpec,
    "interaction": InteractionSpec,
}
OBJECT_SECTIONS = {"field": FieldSpec, "particle": ParticleSpec}

# comma-separated list values, per section; everything else stays a string
_LIST_KEYS = {
    "grid": {"extent"},
    "field": {"center", "source"},
    "particle": {"path_momenta"},
}


def compute_digest(data: bytes) -> str:
    """SHA256 of the file bytes, first 16 hex digits."""
    return hashlib.sha256(data).hexdigest()[:16]


def _strip_comment(line: str) -> str:
    return line.split("#", 1)[0].rstrip()


def _split_list(value: str) -> list[str]:
    return [part.strip() for part in value.split(",") if part.strip()]


def _convert(kind: str, key: str, value: str) -> Any:
    if key in _LIST_KEYS.get(kind, ()):
        return _split_list(value)
    if kind != "interaction":
        return value
    if key == "pairs":
        pairs = []
        for item in _split_list(value):
            first, sep, second = item.partition(":")
            if not sep:
                raise ValueError(f"pair '{item}' must look like a:b")
            pairs.append((first.strip(), second.strip()))
        return pairs
    if key == "signs":
        signs = {}
        for item in _split_list(value):
            templates, sep, sign = item.partition("=")
            if not sep:
                raise ValueError(f"sign entry '{item}' must look like 2:4=-1")
            signs[templates.strip().replace(" ", "")] = int(sign)
        return signs
    return value


def _read_lines(text: str, name: str) -> tuple[list[tuple[str, str | None, dict]], list[Diagnostic]]:
    """Group entries by section: [(kind, object id, {key: (value, line)})]."""
    sections: list[tuple[str, str | None, dict]] = []
    errors: list[Diagnostic] = []
    current: dict | None = None
    last_key: str | None = None

    for number, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw)
        if not line.strip():
            continue
        if raw[:1] in (" ", "\t") and current is not None and last_key is not None:
            value, start = current[last_key]
            current[last_key] = (f"{value}\n{line.strip()}", start)
            continue

        stripped = line.strip()
        header = _SECTION.match(stripped)
        if header:
            kind, object_id = header.group(1), header.group(2)
            if kind in OBJECT_SECTIONS and object_id is None:
                errors.append(Diagnostic("error", f"[{kind}] needs an object id", name, number))
            elif kind not in OBJECT_SECTIONS and kind not in SINGLE_SECTIONS:
                errors.append(Diagnostic("error", f"unknown section [{kind}]", name, number))
            current = {}
            last_key = None
            sections.append((kind, object_id, current))
            continue

        entry = _ENTRY.match(stripped)
        if entry is None or current is None:
            errors.append(Diagnostic("error", f"cannot parse '{stripped}'", name, number))
            continue
        key, value = entry.group(1), entry.group(2).strip()
        current[key] = (value, number)
        last_key = key
    return sections, errors


def _section_label(kind: str, object_id: str | None) -> str:
    return f"{kind} {object_id}" if object_id else kind


def parse_scenario_text(text: str, name: str = "<scenario>") -> Scenario:
    """Build a validated Scenario from scenario text; raises ScenarioError."""
    sections, errors = _read_lines(text, name)
    provenance: dict[str, tuple[str, int]] = {}
    warnings: list[Diagnostic] = []
    data: dict[str, Any] = {"fields": [], "particles": []}
    # loc prefix (as pydantic reports it) -> provenance section label
    locations: dict[tuple, str] = {}

    declared = set(DEFAULT_CONSTANTS)
    for kind, _, entries in sections:
        if kind == "constants":
            declared.update(entries)

    for kind, object_id, entries in sections:
        label = _section_label(kind, object_id)
        if kind in OBJECT_SECTIONS:
            model = OBJECT_SECTIONS[kind]
            body: dict[str, Any] = {"id": object_id}
            params: dict[str, str] = {}
            collection = "fields" if kind == "field" else "particles"
            bucket = data[collection]
            locations[(collection, len(bucket))] = label
        elif kind in SINGLE_SECTIONS:
            model = SINGLE_SECTIONS[kind]
            if kind in data:
                errors.append(Diagnostic("error", f"section [{kind}] appears twice", name, 0))
            body = {}
            params = {}
            locations[(kind,)] = label
        else:
            continue

        for key, (value, line) in entries.items():
            provenance[f"{label}.{key}"] = (name, line)
            if model is None:
                body[key] = value
                continue
            if key in model.model_fields and key != "params":
                try:
                    body[key] = _convert(kind, key, value)
                except ValueError as exc:
                    errors.append(Diagnostic("error", str(exc), name, line))
            elif kind == "field" and key in declared:
                params[key] = value
            else:
                warnings.append(Diagnostic("warning", f"unknown key '{key}' in [{label}] ignored", name, line))

        if kind == "field":
            body["params"] = params
        if kind in OBJECT_SECTIONS:
            bucket.append(body)
        else:
            data[kind] = body

    if errors:
        raise ScenarioError(errors)

    try:
        scenario = Scenario.model_validate(data)
    except ValidationError as exc:
        raise ScenarioError(
            [_diagnostic_from(err, locations, provenance, name) for err in exc.errors()]
        ) from exc

    scenario._provenance = provenance
    scenario._warnings = warnings
    scenario._path = name
    scenario._digest = compute_digest(text.encode("utf-8"))
    for warning in warnings:
        logger.warning("%s", warning)
    return scenario


def _diagnostic_from(err: dict, locations: dict, provenance: dict, name: str) -> Diagnostic:
    loc = tuple(err.get("loc", ()))
    label, key = "", ""
    for size in (2, 1):
        if loc[:size] in locations:
            label = locations[loc[:size]]
            key = str(loc[size]) if len(loc) > size else ""
            break
    file, line = provenance.get(f"{label}.{key}", (name, 0))
    if not line:
        lines = [ln for k, (_, ln) in provenance.items() if k.startswith(f"{label}.")]
        line = min(lines) if lines else 0
    where = f"[{label}] {key}".strip() if label else ".".join(str(p) for p in loc) or "scenario"
    return Diagnostic("error", f"{where}: {err.get('msg', 'invalid value')}", file, line)


def load_scenario(path: str | Path) -> Scenario:
    path = Path(path)
    data = path.read_bytes()
    scenario = parse_scenario_text(data.decode("utf-8"), str(path))
    scenario._digest = compute_digest(data)
    logger.info("Loaded scenario %s (digest %s)", path.name, scenario.digest)
    return scenario
