"""
Scenario models.

Each `[section]` of a scenario file maps onto one pydantic model. Value
provenance (file, line) and load warnings ride along as private
attributes, so `model_dump()` compares only the scenario content.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, PrivateAttr, field_validator, model_validator

from lagrange_ca.config import (
    DEFAULT_COUPLING,
    DEFAULT_EQUIVALENCE,
    DEFAULT_GRANULARITY,
    DEFAULT_RULE_TABLE,
    DEFAULT_SEED,
    DEFAULT_SNAPSHOT_EVERY,
    OCCUPANCY_THRESHOLD,
    PRUNE_THRESHOLD,
)
from lagrange_ca.errors import Diagnostic

OBJECT_ID_PATTERN = r"^[A-Za-z0-9_]+$"

Profile = Literal["gaussian", "sine", "constant", "impulse", "eigenmode"]
InitPolicy = Literal["rest", "travel_right", "travel_left", "shifted_right", "shifted_left"]
PotentialKind = Literal["zero", "constant_force", "harmonic", "barrier", "gaussian"]


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid")


class LagrangianSpec(_Section):
    source: str | None = None
    eom: str | None = None

    @model_validator(mode="after")
    def _exactly_one(self):
        if (self.source is None) == (self.eom is None):
            raise ValueError("give exactly one of 'source' (a Lagrangian) or 'eom' (an equation)")
        return self


class GridSpec(_Section):
    extent: list[int] = Field(min_length=1, max_length=2)
    dx: float = Field(gt=0)
    boundary: Literal["periodic", "fixed"] = "periodic"

    @field_validator("extent")
    @classmethod
    def _enough_cells(cls, value: list[int]) -> list[int]:
        if any(n < 3 for n in value):
            raise ValueError("every extent needs at least 3 cells")
        return value


class RunSpec(_Section):
    dt: float | None = Field(default=None, gt=0)
    ticks: int | None = Field(default=None, ge=0)
    max_time: float | None = Field(default=None, gt=0)
    stop_below: float | None = Field(default=None, gt=0)
    seed: int = Field(default=DEFAULT_SEED, ge=0)
    snapshot_every: int = Field(default=DEFAULT_SNAPSHOT_EVERY, ge=1)
    mode: Literal["corrected", "literal"] = "corrected"
    allow_unstable: bool = False


class PotentialSpec(_Section):
    kind: PotentialKind = "zero"
    strength: float = 0.0
    center: float = 0.0
    width: float = Field(default=1.0, gt=0)
    start: float = 0.0
    end: float = 0.0


class FieldSpec(_Section):
    id: str = Field(pattern=OBJECT_ID_PATTERN)
    profile: Profile = "gaussian"
    amplitude: float = 1.0
    center: list[float] = Field(default_factory=lambda: [0.0], min_length=1, max_length=2)
    width: float = Field(default=1.0, gt=0)
    wavenumber: float = 0.0
    wavelength: float | None = Field(default=None, gt=0)
    phase: float = 0.0
    value: float = 0.0
    cell: int = Field(default=0, ge=0)
    mode: int = Field(default=1, ge=1)
    init: InitPolicy = "rest"
    type: str = "generic"
    spin: int = 1
    mass: float | None = Field(default=None, ge=0)
    params: dict[str, float] = Field(default_factory=dict)
    source: list[str] = Field(default_factory=list, max_length=2)
    source_coupling: float = 0.0


class ParticleSpec(_Section):
    id: str = Field(pattern=OBJECT_ID_PATTERN)
    type: str = "generic"
    x: float = 0.0
    momentum: float | None = None
    velocity: float | None = None
    mass: float | None = Field(default=None, ge=0)
    spin: int = 1
    relativistic: bool = False
    paths: int = Field(default=1, ge=1)
    spread: float = Field(default=0.0, ge=0)
    path_momenta: list[float] = Field(default_factory=list)

    @model_validator(mode="after")
    def _kinematics(self):
        if self.momentum is not None and self.velocity is not None:
            raise ValueError("give momentum or velocity, not both")
        if self.path_momenta and len(self.path_momenta) != self.paths:
            raise ValueError("path_momenta needs one entry per path")
        return self


class InteractionSpec(_Section):
    enabled: bool = True
    pairs: list[tuple[str, str]] = Field(default_factory=list)
    rules: Literal["qed", "qed-mu"] = DEFAULT_RULE_TABLE
    granularity: int = Field(default=DEFAULT_GRANULARITY, ge=1)
    window: str = "1"
    coupling: float = DEFAULT_COUPLING
    signs: dict[str, int] = Field(default_factory=dict)
    equivalence: Literal["binding", "topology"] = DEFAULT_EQUIVALENCE
    occupancy_threshold: float = Field(default=OCCUPANCY_THRESHOLD, gt=0)
    prune_threshold: float = Field(default=PRUNE_THRESHOLD, gt=0)

    @field_validator("window")
    @classmethod
    def _rational_window(cls, value: str) -> str:
        if Fraction(value) < 0:
            raise ValueError("momentum window must be non-negative")
        return value

    @field_validator("signs")
    @classmethod
    def _template_pairs(cls, value: dict[str, int]) -> dict[str, int]:
        for key, sign in value.items():
            first, second = (int(part) for part in key.split(":"))
            if not (1 <= first <= 5 and 1 <= second <= 5):
                raise ValueError(f"sign table key '{key}' must name templates 1..5")
            if sign not in (1, -1):
                raise ValueError(f"sign for '{key}' must be +1 or -1")
        return value

    @property
    def window_fraction(self) -> Fraction:
        return Fraction(self.window)


class Scenario(_Section):
    lagrangian: LagrangianSpec
    constants: dict[str, float] = Field(default_factory=dict)
    grid: GridSpec | None = None
    run: RunSpec = Field(default_factory=RunSpec)
    potential: PotentialSpec | None = None
    fields: list[FieldSpec] = Field(default_factory=list)
    particles: list[ParticleSpec] = Field(default_factory=list)
    interaction: InteractionSpec | None = None

    _provenance: dict[str, tuple[str, int]] = PrivateAttr(default_factory=dict)
    _warnings: list[Diagnostic] = PrivateAttr(default_factory=list)
    _path: str = PrivateAttr(default="")
    _digest: str = PrivateAttr(default="")

    @model_validator(mode="after")
    def _consistent(self):
        if self.fields and self.grid is None:
            raise ValueError("field scenarios need a [grid] section")
        if self.interaction is not None and self.interaction.enabled and self.grid is None:
            raise ValueError("interactions need a [grid] section")
        ids = [f.id for f in self.fields] + [p.id for p in self.particles]
        duplicates = sorted({i for i in ids if ids.count(i) > 1})
        if duplicates:
            raise ValueError(f"duplicate object ids: {', '.join(duplicates)}")
        return self

    # -- provenance ---------------------------------------------------------
    @property
    def provenance(self) -> dict[str, tuple[str, int]]:
        return self._provenance

    @property
    def warnings(self) -> list[Diagnostic]:
        return self._warnings

    @property
    def path(self) -> str:
        return self._path

    @property
    def digest(self) -> str:
        return self._digest

    def where(self, dotted_key: str) -> tuple[str, int]:
        """(file, line) a value came from; ("", 0) when defaulted."""
        return self._provenance.get(dotted_key, (self._path, 0))

    def object_ids(self) -> list[str]:
        return [f.id for f in self.fields] + [p.id for p in self.particles]
