"""
Scenario and run-output writers.

All numbers go through FLOAT_FORMAT (17 significant digits, no locale),
so identical runs produce byte-identical files.
"""
from __future__ import annotations

import csv
import json
import logging
from pathlib import Path
from typing import Any, TextIO

import numpy as np

from lagrange_ca.config import FLOAT_FORMAT
from lagrange_ca.engine.grid import CellGrid
from lagrange_ca.engine.record import RunRecord, Snapshot
from lagrange_ca.scenario.models import Scenario

logger = logging.getLogger(__name__)

SNAPSHOT_HEADER = ["tick", "t", "object", "cell", "x", "y", "re", "im", "abs2"]
PLOT_HEADER = ["series", "object", "tick", "t", "cell", "x", "value"]
EVENT_HEADER = [
    "tick", "t", "cell", "in_ids", "in_types", "status",
    "out_ids", "out_types", "channels", "rows", "energy_residual",
]


def fmt(value: float) -> str:
    return format(float(value), FLOAT_FORMAT)


def _writer(sink: TextIO):
    return csv.writer(sink, lineterminator="\n")


# ---------------------------------------------------------------------------
# Scenario text
# ---------------------------------------------------------------------------
def _scenario_value(key: str, value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if key == "pairs":
        return ", ".join(f"{a}:{b}" for a, b in value)
    if key == "signs":
        return ", ".join(f"{k}={v}" for k, v in value.items())
    if isinstance(value, (list, tuple)):
        return ", ".join(_scenario_value(key, v) for v in value)
    text = str(value)
    return text.replace("\n", "\n    ")


def _section(sink: TextIO, header: str, body: dict[str, Any]) -> None:
    sink.write(f"[{header}]\n")
    for key, value in body.items():
        if value is None or key == "id":
            continue
        if key == "params":
            for name, number in value.items():
                sink.write(f"{name} = {_scenario_value(name, number)}\n")
            continue
        if isinstance(value, (list, dict)) and not value:
            continue
        sink.write(f"{key} = {_scenario_value(key, value)}\n")
    sink.write("\n")


def write_scenario(scenario: Scenario, sink: TextIO) -> None:
    """Scenario text that loads back to an equal Scenario."""
    data = scenario.model_dump()
    _section(sink, "lagrangian", data["lagrangian"])
    if data["constants"]:
        _section(sink, "constants", data["constants"])
    for name in ("grid", "run", "potential"):
        if data[name] is not None:
            _section(sink, name, data[name])
    for spec in data["fields"]:
        _section(sink, f"field {spec['id']}", spec)
    for spec in data["particles"]:
        _section(sink, f"particle {spec['id']}", spec)
    if data["interaction"] is not None:
        _section(sink, "interaction", data["interaction"])


# ---------------------------------------------------------------------------
# Snapshots and plot data
# ---------------------------------------------------------------------------
def _coordinates(grid: CellGrid | None, cell: int) -> tuple[str, str]:
    if grid is None:
        return "", ""
    position = grid.position_of(cell)
    return fmt(position[0]), fmt(position[1]) if len(position) > 1 else ""


def write_snapshot(snapshot: Snapshot, grid: CellGrid | None, sink: TextIO, *, header: bool = True) -> None:
    """One row per (object, cell) for fields and per path for particles."""
    out = _writer(sink)
    if header:
        out.writerow(SNAPSHOT_HEADER)
    tick, t = str(snapshot.tick), fmt(snapshot.t)
    for fid, psi in snapshot.fields.items():
        flat = np.asarray(psi).ravel()
        for cell, value in enumerate(flat):
            x, y = _coordinates(grid, cell)
            out.writerow([tick, t, fid, cell, x, y, fmt(value.real), fmt(value.imag), fmt(abs(value) ** 2)])
    for pid, sample in snapshot.particles.items():
        for member, amplitude in zip(sample.members, sample.amplitudes):
            cell = grid.cell_of(member.x) if grid is not None else -1
            amplitude = complex(amplitude)
            out.writerow([
                tick, t, pid, cell, fmt(member.x), "",
                fmt(amplitude.real), fmt(amplitude.imag), fmt(abs(amplitude) ** 2),
            ])


def write_snapshots(record: RunRecord, sink: TextIO) -> None:
    grid = record.final.grid
    for index, snapshot in enumerate(record.snapshots):
        write_snapshot(snapshot, grid, sink, header=index == 0)


def emit_plot_data(record: RunRecord, sink: TextIO) -> None:
    """Particle position/velocity series and field density profiles per snapshot."""
    grid = record.final.grid
    out = _writer(sink)
    out.writerow(PLOT_HEADER)
    for snapshot in record.snapshots:
        tick, t = str(snapshot.tick), fmt(snapshot.t)
        for pid, sample in snapshot.particles.items():
            cell = grid.cell_of(sample.position) if grid is not None else -1
            x = fmt(sample.position)
            out.writerow(["position", pid, tick, t, cell, x, x])
            out.writerow(["velocity", pid, tick, t, cell, x, fmt(sample.velocity)])
        for fid, psi in snapshot.fields.items():
            for cell, value in enumerate(np.asarray(psi).ravel()):
                x, _ = _coordinates(grid, cell)
                out.writerow(["density", fid, tick, t, cell, x, fmt(abs(value) ** 2)])


def write_events(record: RunRecord, sink: TextIO) -> None:
    out = _writer(sink)
    out.writerow(EVENT_HEADER)
    for e in record.events:
        out.writerow([
            e.tick, fmt(e.t), e.cell, "|".join(e.in_ids), "|".join(e.in_types), e.status,
            "|".join(e.out_ids), "|".join(e.out_types), e.channels, e.rows, fmt(e.energy_residual),
        ])


def record_document(record: RunRecord) -> dict[str, Any]:
    return {
        "digest": record.digest,
        "seed": record.seed,
        "flags": record.flags,
        "overrides": record.overrides,
        "rng": record.rng,
        "snapshots": len(record.snapshots),
        "summary": record.summary(),
    }


def write_record(record: RunRecord, out_dir: str | Path) -> list[Path]:
    """snapshots.csv, plot.csv, events.csv and record.json under out_dir."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for name, writer in (
        ("snapshots.csv", write_snapshots),
        ("plot.csv", emit_plot_data),
        ("events.csv", write_events),
    ):
        path = out_dir / name
        with open(path, "w", encoding="utf-8", newline="") as sink:
            writer(record, sink)
        written.append(path)

    path = out_dir / "record.json"
    with open(path, "w", encoding="utf-8") as sink:
        json.dump(record_document(record), sink, indent=2, sort_keys=True, default=str)
        sink.write("\n")
    written.append(path)
    logger.info("Wrote %d output file(s) to %s", len(written), out_dir)
    return written
