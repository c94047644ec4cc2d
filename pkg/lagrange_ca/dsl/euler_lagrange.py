"""
Equations of motion from Lagrangians.

Pipeline:
  1. Classify the Lagrangian as particle (x, d(x,t), V) or field (psi, ...).
  2. Form the Euler-Lagrange expression E = 0.
       particle: d/dt(∂L/∂ẋ) − ∂L/∂x
       field:    ∂/∂t(∂L/∂(∂ψ/∂t)) + ∂/∂x(∂L/∂(∂ψ/∂x)) − ∂L/∂ψ
  3. Split E = A·(highest time derivative) + B and solve for it; A must
     be a nonzero constant monomial.
"""
from __future__ import annotations

import logging
from collections.abc import Iterable
from dataclasses import dataclass
from functools import cached_property

from lagrange_ca.dsl.calculus import (
    FIELD_SPACE_CHAIN,
    FIELD_TIME_CHAIN,
    PARTICLE_TIME_CHAIN,
    partial,
    total_derivative,
)
from lagrange_ca.dsl.expr import Expr, is_dynamic_key, leaf_from_key
from lagrange_ca.dsl.parser import parse_equation_text
from lagrange_ca.dsl.polynomial import Polynomial, term_order, to_polynomial
from lagrange_ca.errors import DegenerateLagrangianError, UnsupportedLagrangianError

logger = logging.getLogger(__name__)

PARTICLE = "particle"
FIELD = "field"

UNITS = {
    "m": "mass",
    "k": "mass/time^2",
    "F": "force",
    "v": "length/time",
    "c_w": "length/time",
    "c": "length/time",
    "nu": "1/time",
    "psi0": "field",
    "hbar": "action",
    "q": "charge",
    "x0": "length",
    "V": "energy",
}

PARTICLE_KEYS = frozenset({"x", "d(x,t)", "d2(x,t)", "d(V,x)", "d2(V,x)"})
FIELD_KEYS = frozenset({"psi", "d(psi,t)", "d2(psi,t)", "d(psi,x)", "d2(psi,x)"})

_ALLOWED_RHS = {
    PARTICLE: frozenset({"x", "d(x,t)", "d(V,x)"}),
    FIELD: frozenset({"psi", "d(psi,x)", "d2(psi,x)", "V"}),
}


@dataclass(frozen=True)
class EquationOfMotion:
    kind: str
    time_order: int
    solved_for: str
    rhs: Expr
    parameters: tuple[tuple[str, str], ...] = ()

    @cached_property
    def polynomial(self) -> Polynomial:
        return to_polynomial(self.rhs)

    @property
    def constants(self) -> list[str]:
        return [name for name, _ in self.parameters]

    def __str__(self) -> str:
        return format_equation(self)


def classify(keys: Iterable[str]) -> str:
    keys = set(keys)
    has_particle = bool(keys & (PARTICLE_KEYS | {"x"})) and not keys & FIELD_KEYS
    has_field = bool(keys & FIELD_KEYS)
    if has_field:
        return FIELD
    if has_particle:
        return PARTICLE
    raise DegenerateLagrangianError("Lagrangian contains no dynamical variable")


def euler_lagrange(lagrangian: Expr) -> EquationOfMotion:
    """Derive and solve the equation of motion for a supported Lagrangian."""
    L = to_polynomial(lagrangian)
    kind = classify(L.keys())

    if kind == PARTICLE:
        momentum = partial(L, "d(x,t)")
        expression = total_derivative(momentum, PARTICLE_TIME_CHAIN, "d/dt") - partial(L, "x")
        highest = "d2(x,t)"
    else:
        expression = (
            total_derivative(partial(L, "d(psi,t)"), FIELD_TIME_CHAIN, "d/dt")
            + total_derivative(partial(L, "d(psi,x)"), FIELD_SPACE_CHAIN, "d/dx")
            - partial(L, "psi")
        )
        highest = "d2(psi,t)"

    eom = solve_for(expression, highest, kind)
    logger.debug("Euler-Lagrange: %s", eom)
    return eom


def solve_for(expression: Polynomial, highest: str, kind: str) -> EquationOfMotion:
    if expression.is_zero():
        raise DegenerateLagrangianError("Euler-Lagrange expression vanishes identically")
    coefficient, remainder = expression.split_linear(highest)
    if coefficient.is_zero():
        raise DegenerateLagrangianError(
            f"no {highest} term: the Lagrangian has no kinetic part to solve for"
        )
    if not coefficient.is_constant_monomial():
        raise UnsupportedLagrangianError(
            f"coefficient of {highest} is not a constant", str(coefficient.to_expr())
        )
    rhs = -(remainder * coefficient.reciprocal())
    return make_equation(kind, 2, highest, rhs)


def make_equation(kind: str, order: int, solved_for: str, rhs: Polynomial) -> EquationOfMotion:
    allowed = _ALLOWED_RHS[kind]
    for key in sorted(rhs.keys()):
        if is_dynamic_key(key) and key not in allowed:
            raise UnsupportedLagrangianError(f"{kind} equation may not depend on {key}", str(rhs))
    constants = sorted(key for key in rhs.keys() if not is_dynamic_key(key) and key not in ("i", "pi"))
    parameters = tuple((name, UNITS.get(name, "user")) for name in constants)
    return EquationOfMotion(kind, order, solved_for, rhs.to_expr(), parameters)


def parse_equation(source: str, constants: Iterable[str] = ()) -> EquationOfMotion:
    """Read an equation of motion given directly, e.g. `d(psi,t) = ...`."""
    lhs, rhs = parse_equation_text(source, constants)
    solved_for = f"{'d' if lhs.order == 1 else 'd2'}({lhs.name},{lhs.wrt})"
    if lhs.name == "x":
        kind = PARTICLE
    elif lhs.name == "psi":
        kind = FIELD
    else:
        raise UnsupportedLagrangianError("left-hand side must differentiate x or psi", solved_for)
    return make_equation(kind, lhs.order, solved_for, to_polynomial(rhs))


# ---------------------------------------------------------------------------
# Human-readable form
# ---------------------------------------------------------------------------
def _power(key: str, exp: int) -> str:
    name = str(leaf_from_key(key))
    return name if exp == 1 else f"{name}^{exp}"


def _format_term(monomial, coefficient) -> str:
    numerator = [_power(k, e) for k, e in monomial if not is_dynamic_key(k) and e > 0]
    denominator = [_power(k, -e) for k, e in monomial if not is_dynamic_key(k) and e < 0]
    dynamic = [_power(k, e) for k, e in monomial if is_dynamic_key(k)]

    magnitude = abs(coefficient)
    if magnitude.numerator != 1 or not (numerator or denominator or dynamic):
        numerator.insert(0, str(magnitude.numerator))
    if magnitude.denominator != 1:
        denominator.insert(0, str(magnitude.denominator))

    if denominator:
        top = "*".join(numerator) or "1"
        bottom = denominator[0] if len(denominator) == 1 else "(" + "*".join(denominator) + ")"
        ratio = f"({top}/{bottom})"
    else:
        ratio = "*".join(numerator)
    return "*".join(part for part in (ratio, *dynamic) if part)


def format_polynomial(poly: Polynomial) -> str:
    if poly.is_zero():
        return "0"
    out = ""
    for monomial in sorted(poly.terms, key=term_order):
        coefficient = poly.terms[monomial]
        body = _format_term(monomial, coefficient)
        if not out:
            out = f"-{body}" if coefficient < 0 else body
        else:
            out += f" - {body}" if coefficient < 0 else f" + {body}"
    return out


def format_equation(eom: EquationOfMotion) -> str:
    """e.g. `d2(x,t) = -(k/m)*x`."""
    return f"{eom.solved_for} = {format_polynomial(eom.polynomial)}"


__all__ = [
    "EquationOfMotion",
    "euler_lagrange",
    "parse_equation",
    "format_equation",
    "format_polynomial",
    "PARTICLE",
    "FIELD",
]
