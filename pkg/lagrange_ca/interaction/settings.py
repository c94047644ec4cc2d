"""Interaction configuration and the event record written per interaction."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from lagrange_ca.config import (
    DEFAULT_COUPLING,
    DEFAULT_EQUIVALENCE,
    DEFAULT_GRANULARITY,
    DEFAULT_MOMENTUM_WINDOW,
    DEFAULT_RULE_TABLE,
    OCCUPANCY_THRESHOLD,
    PRUNE_THRESHOLD,
)

PROCESSED = "processed"
NO_CHANNEL = "no-channel"
CANCELLED = "cancelled"


@dataclass(frozen=True)
class InteractionSettings:
    enabled: bool = False
    pairs: tuple[tuple[str, str], ...] = ()
    rule_table: str = DEFAULT_RULE_TABLE
    granularity: int = DEFAULT_GRANULARITY
    window: Fraction = DEFAULT_MOMENTUM_WINDOW
    coupling: float = DEFAULT_COUPLING
    signs: tuple[tuple[tuple[int, int], int], ...] = ()
    equivalence: str = DEFAULT_EQUIVALENCE
    occupancy_threshold: float = OCCUPANCY_THRESHOLD
    prune_threshold: float = PRUNE_THRESHOLD

    def sign_between(self, first: int, second: int) -> int:
        """Relative sign of channels built from two templates (+1 unless configured)."""
        if first == second:
            return 1
        key = (min(first, second), max(first, second))
        return dict(self.signs).get(key, 1)


@dataclass(frozen=True)
class InteractionEvent:
    tick: int
    t: float
    cell: int
    position: tuple[float, ...]
    in_ids: tuple[str, str]
    in_types: tuple[str, str]
    status: str
    out_ids: tuple[str, ...] = ()
    out_types: tuple[str, ...] = ()
    channels: int = 0
    rows: int = 0
    energy_residual: float = 0.0
