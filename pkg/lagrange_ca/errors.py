"""
Exception hierarchy.

Input problems derive from ValueError and abort before or outside the
simulation loop (CLI exit 2, HTTP 400). Failures while ticking derive
from RuntimeError (CLI exit 1, HTTP 500).
"""
from __future__ import annotations

from dataclasses import dataclass


class LagrangeCAError(Exception):
    """Marker base for every error raised by this package."""


class InputError(LagrangeCAError, ValueError):
    pass


class LagrangianSyntaxError(InputError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{message} at line {line}, column {column}")
        self.line = line
        self.column = column


class UndeclaredSymbolError(InputError):
    def __init__(self, name: str, line: int = 1, column: int = 1):
        super().__init__(f"undeclared symbol '{name}' at line {line}, column {column}")
        self.name = name
        self.line = line
        self.column = column


class UnsupportedLagrangianError(InputError):
    def __init__(self, message: str, subterm: str = ""):
        super().__init__(f"{message}: {subterm}" if subterm else message)
        self.subterm = subterm


class DegenerateLagrangianError(InputError):
    pass


class NoTemplateError(InputError):
    pass


class UnknownParticleTypeError(InputError):
    pass


class UnknownObjectError(InputError):
    pass


class ContractViolation(InputError):
    pass


@dataclass(frozen=True)
class Diagnostic:
    """A validation finding tied to a scenario location."""

    level: str  # "error" | "warning"
    message: str
    file: str = ""
    line: int = 0

    def __str__(self) -> str:
        where = f"{self.file}:{self.line}: " if self.file else ""
        return f"{where}{self.level}: {self.message}"


class ScenarioError(InputError):
    def __init__(self, diagnostics: list[Diagnostic]):
        self.diagnostics = list(diagnostics)
        super().__init__("; ".join(str(d) for d in self.diagnostics))


class SimulationError(LagrangeCAError, RuntimeError):
    tick: int | None = None


class NumericalInstabilityError(SimulationError):
    def __init__(self, object_id: str, cell: int, tick: int):
        super().__init__(f"non-finite value in '{object_id}' at cell {cell} (tick {tick})")
        self.object_id = object_id
        self.cell = cell
        self.tick = tick


class NormDivergenceError(SimulationError):
    def __init__(self, object_id: str, norm: float, limit: float, tick: int):
        super().__init__(
            f"norm of '{object_id}' reached {norm:.6g} (limit {limit:.6g}) at tick {tick}"
        )
        self.object_id = object_id
        self.tick = tick
