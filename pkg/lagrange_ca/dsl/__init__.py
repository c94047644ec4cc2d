"""Lagrangian DSL: parsing, canonical forms and Euler-Lagrange derivation."""
from lagrange_ca.dsl.calculus import differentiate
from lagrange_ca.dsl.density import DensityCheckReport, check_density_requirements
from lagrange_ca.dsl.euler_lagrange import (
    FIELD,
    PARTICLE,
    EquationOfMotion,
    euler_lagrange,
    format_equation,
    parse_equation,
)
from lagrange_ca.dsl.expr import Const, Deriv, Expr, Pow, Prod, Sum, Sym, pretty_print
from lagrange_ca.dsl.parser import parse
from lagrange_ca.dsl.polynomial import Polynomial, simplify, to_polynomial

__all__ = [
    "Const", "Deriv", "Expr", "Pow", "Prod", "Sum", "Sym",
    "Polynomial", "to_polynomial", "simplify", "pretty_print",
    "parse", "parse_equation", "differentiate", "euler_lagrange",
    "EquationOfMotion", "format_equation", "PARTICLE", "FIELD",
    "DensityCheckReport", "check_density_requirements",
]
