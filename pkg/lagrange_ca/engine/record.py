"""Snapshots and the run record returned by `run`."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np

from lagrange_ca.engine.objects import PathMember
from lagrange_ca.interaction.settings import InteractionEvent


@dataclass(frozen=True)
class ParticleSample:
    id: str
    ptype: str
    members: tuple[PathMember, ...]
    amplitudes: tuple[complex, ...]
    position: float
    momentum: float
    velocity: float
    tau: float


@dataclass(frozen=True, eq=False)
class Snapshot:
    tick: int
    t: float
    fields: dict[str, np.ndarray]
    particles: dict[str, ParticleSample]


@dataclass(frozen=True, eq=False)
class RunRecord:
    digest: str
    seed: int
    flags: dict[str, Any]
    snapshots: tuple[Snapshot, ...]
    events: tuple[InteractionEvent, ...]
    final: Any  # SystemState
    rng: dict = field(default_factory=dict)
    overrides: dict[str, Any] = field(default_factory=dict)

    @property
    def ticks(self) -> int:
        return self.final.tick

    def summary(self) -> dict[str, Any]:
        state = self.final
        dx = state.grid.dx if state.grid is not None else 1.0
        return {
            "ticks": state.tick,
            "t": state.t,
            "snapshots": len(self.snapshots),
            "events": len(self.events),
            "fields": {fid: f.norm(dx) for fid, f in sorted(state.fields.items())},
            "particles": {
                pid: {
                    "type": pw.ptype,
                    "x": pw.expected_position(),
                    "p": pw.expected_momentum(),
                    "tau": pw.tau,
                    "paths": len(pw.paths.rows),
                }
                for pid, pw in sorted(state.particles.items())
            },
        }
