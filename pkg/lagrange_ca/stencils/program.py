"""
Stencil programs: the fixed step schedule each equation-of-motion family
runs every tick, with step 4 (or step 1 for particles) evaluating the
derived right-hand side.
"""
from __future__ import annotations

import logging
import re
from collections.abc import Mapping
from dataclasses import dataclass

from lagrange_ca.dsl.euler_lagrange import FIELD, PARTICLE, EquationOfMotion, format_polynomial
from lagrange_ca.dsl.polynomial import BoundPolynomial, bind_constants, evaluate_constant
from lagrange_ca.errors import NoTemplateError

logger = logging.getLogger(__name__)

PARTICLE_2ND = "particle-2nd-order"
FIELD_2ND_T = "field-2nd-order-t"
FIELD_1ST_T = "field-1st-order-t"

LAPLACIAN = "d2(psi,x)"

# written name -> difference-unit name, longest first
_DELTA_NAMES = (
    ("d2(psi,x)", "Δ²ψdx"),
    ("d(psi,x)", "Δψdx"),
    ("psi0", "ψ₀"),
    ("psi", "ψ"),
    ("hbar", "ħ"),
    ("*", "·"),
)
_SUPERSCRIPTS = str.maketrans("0123456789-", "⁰¹²³⁴⁵⁶⁷⁸⁹⁻")
_POWER = re.compile(r"\^(-?\d+)")


@dataclass(frozen=True)
class StencilStep:
    number: int
    text: str


@dataclass(frozen=True)
class StencilProgram:
    family: str
    steps: tuple[StencilStep, ...]
    eom: EquationOfMotion
    lookback: int

    @property
    def required_parameters(self) -> list[str]:
        return self.eom.constants

    def bind(self, values: Mapping[str, float]) -> BoundPolynomial:
        return bind_constants(self.eom.polynomial, values)

    def laplacian_coefficient(self, values: Mapping[str, float]) -> complex:
        """Coefficient multiplying Δ²ψdx in the right-hand side (0 if absent)."""
        coefficient = self.eom.polynomial.derivative(LAPLACIAN)
        if coefficient.is_zero():
            return 0j
        return evaluate_constant(coefficient, values)

    def describe(self) -> list[str]:
        return [f"{step.number}. {step.text}" for step in self.steps]


def delta_text(rhs: str) -> str:
    """A right-hand side spelled in difference units: v^2*d2(psi,x) -> v²·Δ²ψdx."""
    for written, name in _DELTA_NAMES:
        rhs = rhs.replace(written, name)
    return _POWER.sub(lambda m: m.group(1).translate(_SUPERSCRIPTS), rhs)


def _steps(*texts: str) -> tuple[StencilStep, ...]:
    return tuple(StencilStep(i, text) for i, text in enumerate(texts, start=1))


def compile_stencil(eom: EquationOfMotion) -> StencilProgram:
    """Map an equation of motion onto its stencil family."""
    rhs = format_polynomial(eom.polynomial)

    if eom.kind == PARTICLE and eom.time_order == 2:
        steps = _steps(
            f"ẍ = {rhs}",
            "ẋ ← ẋ + ẍ·Δτ",
            "x ← x + ẋ·Δτ",
        )
        program = StencilProgram(PARTICLE_2ND, steps, eom, lookback=1)
    elif eom.kind == FIELD and eom.time_order == 2:
        steps = _steps(
            "t(j+1) = t(j) + Δt",
            "Δψdx = (ψ[i+1] − ψ[i−1]) / (2Δx)",
            "Δ²ψdx = (ψ[i+1] − 2ψ[i] + ψ[i−1]) / Δx²",
            f"Δ²ψdt = {delta_text(rhs)}",
            "ψ(t+Δt) = Δ²ψdt·Δt·Δt + 2ψ(t) − ψ(t−Δt)",
        )
        program = StencilProgram(FIELD_2ND_T, steps, eom, lookback=2)
    elif eom.kind == FIELD and eom.time_order == 1:
        steps = _steps(
            "t(j+1) = t(j) + Δt",
            "Δψdx = (ψ[i+1] − ψ[i−1]) / (2Δx)",
            "Δ²ψdx = (ψ[i+1] − 2ψ[i] + ψ[i−1]) / Δx²",
            f"Δψdt = {delta_text(rhs)}",
            "Δψdt = Δψdt + Δ²ψdt·Δt   (literal mode only)",
            "ψ(t+Δt) = ψ(t) + Δψdt·Δt",
        )
        program = StencilProgram(FIELD_1ST_T, steps, eom, lookback=1)
    else:
        raise NoTemplateError(
            f"no stencil template for a {eom.kind} equation of time order {eom.time_order}"
        )

    logger.debug("Compiled %s stencil (%d steps)", program.family, len(program.steps))
    return program
