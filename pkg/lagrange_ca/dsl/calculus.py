"""
Differentiation on canonical polynomials.

Partial derivatives treat every leaf as independent except the opaque
potential V, which depends on x: dV/dx yields the symbol d(V,x).
Total derivatives follow a chain table per system kind.
"""
from __future__ import annotations

from collections.abc import Mapping

from lagrange_ca.dsl.expr import Deriv, Expr, Sym, leaf_key
from lagrange_ca.dsl.polynomial import Polynomial, to_polynomial
from lagrange_ca.errors import UnsupportedLagrangianError

# leaf -> (leaf it depends on, key of its derivative)
_POTENTIAL_CHAIN = {
    "V": ("x", "d(V,x)"),
    "d(V,x)": ("x", "d2(V,x)"),
}

# How each leaf evolves under d/dt for a particle trajectory x(t).
PARTICLE_TIME_CHAIN: dict[str, Polynomial | None] = {
    "x": Polynomial.leaf("d(x,t)"),
    "d(x,t)": Polynomial.leaf("d2(x,t)"),
    "V": Polynomial.leaf("d(V,x)") * Polynomial.leaf("d(x,t)"),
    "d(V,x)": None,
}

# Field leaves under d/dt and d/dx; None marks a mixed derivative.
FIELD_TIME_CHAIN: dict[str, Polynomial | None] = {
    "psi": Polynomial.leaf("d(psi,t)"),
    "d(psi,t)": Polynomial.leaf("d2(psi,t)"),
    "d(psi,x)": None,
    "V": Polynomial(),
    "x": Polynomial(),
}

FIELD_SPACE_CHAIN: dict[str, Polynomial | None] = {
    "psi": Polynomial.leaf("d(psi,x)"),
    "d(psi,x)": Polynomial.leaf("d2(psi,x)"),
    "d(psi,t)": None,
    "V": Polynomial.leaf("d(V,x)"),
    "x": Polynomial.constant(1),
}


def partial(poly: Polynomial, wrt: str) -> Polynomial:
    result = poly.derivative(wrt)
    for leaf, (depends_on, derived) in _POTENTIAL_CHAIN.items():
        if depends_on == wrt and leaf in poly.keys():
            result = result + poly.derivative(leaf) * Polynomial.leaf(derived)
    return result


def differentiate(expr: Expr, wrt: Sym | Deriv | str) -> Expr:
    """∂expr/∂wrt as a canonical tree (linearity, product and power rules)."""
    key = wrt if isinstance(wrt, str) else leaf_key(wrt)
    return partial(to_polynomial(expr), key).to_expr()


def total_derivative(poly: Polynomial, chain: Mapping[str, Polynomial | None], label: str) -> Polynomial:
    result = Polynomial()
    for key in sorted(poly.keys()):
        if key not in chain:
            continue
        step = chain[key]
        if step is None:
            raise UnsupportedLagrangianError(
                f"mixed derivative needed for {label} of {key}", str(poly.to_expr())
            )
        result = result + poly.derivative(key) * step
    return result
