"""
Canonical sum-of-products form.

A Polynomial maps monomials (sorted tuples of (leaf key, exponent)) to exact
Fraction coefficients. The imaginary unit `i` is reduced on the fly
(i^2 = -1), so coefficients stay rational. Negative exponents appear only on
constants, coming from division.
"""
from __future__ import annotations

import math
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from lagrange_ca.dsl.expr import (
    Const,
    Deriv,
    Expr,
    Pow,
    Prod,
    Sum,
    Sym,
    is_dynamic_key,
    leaf_from_key,
    leaf_key,
    make_pow,
    make_prod,
    make_sum,
)
from lagrange_ca.errors import UnsupportedLagrangianError

Monomial = tuple[tuple[str, int], ...]

IMAGINARY_UNIT = "i"
BUILTIN_VALUES: dict[str, complex] = {"pi": math.pi, "i": 1j}


def _normalize_monomial(powers: Mapping[str, int]) -> tuple[Monomial, int]:
    """Drop zero exponents and reduce powers of i; returns (monomial, sign)."""
    sign = 1
    items = []
    for key, exp in powers.items():
        if key == IMAGINARY_UNIT:
            exp %= 4
            if exp >= 2:
                sign = -sign
                exp -= 2
        if exp:
            items.append((key, exp))
    return tuple(sorted(items)), sign


@dataclass(frozen=True)
class Polynomial:
    terms: Mapping[Monomial, Fraction] = field(default_factory=dict)

    # -- construction -------------------------------------------------------
    @classmethod
    def constant(cls, value: Fraction | int) -> "Polynomial":
        value = Fraction(value)
        return cls({(): value} if value else {})

    @classmethod
    def leaf(cls, key: str, exp: int = 1) -> "Polynomial":
        monomial, sign = _normalize_monomial({key: exp})
        return cls({monomial: Fraction(sign)})

    @classmethod
    def _collect(cls, pairs: Iterable[tuple[Monomial, Fraction]]) -> "Polynomial":
        terms: dict[Monomial, Fraction] = {}
        for monomial, coefficient in pairs:
            terms[monomial] = terms.get(monomial, Fraction(0)) + coefficient
        return cls({m: c for m, c in terms.items() if c != 0})

    # -- arithmetic ---------------------------------------------------------
    def __add__(self, other: "Polynomial") -> "Polynomial":
        return Polynomial._collect([*self.terms.items(), *other.terms.items()])

    def __neg__(self) -> "Polynomial":
        return Polynomial({m: -c for m, c in self.terms.items()})

    def __sub__(self, other: "Polynomial") -> "Polynomial":
        return self + (-other)

    def __mul__(self, other: "Polynomial") -> "Polynomial":
        pairs = []
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                powers = dict(m1)
                for key, exp in m2:
                    powers[key] = powers.get(key, 0) + exp
                monomial, sign = _normalize_monomial(powers)
                pairs.append((monomial, c1 * c2 * sign))
        return Polynomial._collect(pairs)

    def __pow__(self, exp: int) -> "Polynomial":
        if exp < 0:
            return self.reciprocal() ** (-exp)
        result = Polynomial.constant(1)
        for _ in range(exp):
            result = result * self
        return result

    def reciprocal(self) -> "Polynomial":
        if len(self.terms) != 1:
            raise UnsupportedLagrangianError("division by a sum", str(self.to_expr()))
        (monomial, coefficient), = self.terms.items()
        if any(is_dynamic_key(key) for key, _ in monomial):
            raise UnsupportedLagrangianError("division by a non-constant", str(self.to_expr()))
        return Polynomial.leaf_product({key: -exp for key, exp in monomial}, 1 / coefficient)

    @classmethod
    def leaf_product(cls, powers: Mapping[str, int], coefficient: Fraction) -> "Polynomial":
        monomial, sign = _normalize_monomial(powers)
        return cls({monomial: coefficient * sign} if coefficient else {})

    # -- inspection ---------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def keys(self) -> set[str]:
        return {key for monomial in self.terms for key, _ in monomial}

    def degree_in(self, key: str) -> int:
        return max((dict(m).get(key, 0) for m in self.terms), default=0)

    def derivative(self, key: str) -> "Polynomial":
        """Partial derivative treating every other leaf as independent."""
        pairs = []
        for monomial, coefficient in self.terms.items():
            powers = dict(monomial)
            exp = powers.get(key, 0)
            if exp == 0:
                continue
            powers[key] = exp - 1
            reduced, sign = _normalize_monomial(powers)
            pairs.append((reduced, coefficient * exp * sign))
        return Polynomial._collect(pairs)

    def split_linear(self, key: str) -> tuple["Polynomial", "Polynomial"]:
        """Return (A, B) with self = A*key + B, requiring degree <= 1 in key."""
        if self.degree_in(key) > 1:
            raise UnsupportedLagrangianError(f"equation is not linear in {key}", str(self.to_expr()))
        coefficient = self.derivative(key)
        remainder = Polynomial({m: c for m, c in self.terms.items() if key not in dict(m)})
        return coefficient, remainder

    def is_constant_monomial(self) -> bool:
        return len(self.terms) == 1 and not any(
            is_dynamic_key(key) for monomial in self.terms for key, _ in monomial
        )

    # -- conversion ---------------------------------------------------------
    def to_expr(self) -> Expr:
        """Canonical tree: terms in monomial order, constants before variables."""
        terms = []
        for monomial in sorted(self.terms, key=term_order):
            factors: list[Expr] = [Const(self.terms[monomial])]
            for key, exp in sorted(monomial, key=_factor_order):
                factors.append(make_pow(leaf_from_key(key), exp))
            terms.append(make_prod(factors))
        return make_sum(terms)

    def __str__(self) -> str:
        return str(self.to_expr())


def _factor_order(item: tuple[str, int]) -> tuple[bool, str]:
    key, _ = item
    return (is_dynamic_key(key), key)


def term_order(monomial: Monomial) -> tuple:
    dynamic = tuple(item for item in monomial if is_dynamic_key(item[0]))
    constant = tuple(item for item in monomial if not is_dynamic_key(item[0]))
    return (not dynamic, dynamic, constant)


def to_polynomial(expr: Expr) -> Polynomial:
    if isinstance(expr, Const):
        return Polynomial.constant(expr.value)
    if isinstance(expr, (Sym, Deriv)):
        return Polynomial.leaf(leaf_key(expr))
    if isinstance(expr, Sum):
        result = Polynomial()
        for term in expr.terms:
            result = result + to_polynomial(term)
        return result
    if isinstance(expr, Prod):
        result = Polynomial.constant(1)
        for factor in expr.factors:
            result = result * to_polynomial(factor)
        return result
    if isinstance(expr, Pow):
        return to_polynomial(expr.base) ** expr.exp
    raise TypeError(f"not an expression node: {expr!r}")


def simplify(expr: Expr) -> Expr:
    """Canonical sum-of-products tree of expr."""
    return to_polynomial(expr).to_expr()


# ---------------------------------------------------------------------------
# Numeric evaluation
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class BoundPolynomial:
    """A polynomial with its constants substituted; variables stay free.

    Calling it with a mapping from variable keys to numbers or numpy
    arrays evaluates the sum term by term.
    """

    terms: tuple[tuple[complex, tuple[tuple[str, int], ...]], ...]

    @property
    def variables(self) -> set[str]:
        return {key for _, factors in self.terms for key, _ in factors}

    def __call__(self, bindings: Mapping[str, "np.ndarray | float | complex"]):
        total = 0
        for coefficient, factors in self.terms:
            value = coefficient
            for key, exp in factors:
                value = value * bindings[key] ** exp
            total = total + value
        return total

    def is_real(self) -> bool:
        return all(complex(c).imag == 0 for c, _ in self.terms)


def bind_constants(poly: Polynomial, values: Mapping[str, float]) -> BoundPolynomial:
    """Substitute constant values; raises KeyError naming an unbound constant."""
    terms = []
    for monomial, coefficient in poly.terms.items():
        number: complex = complex(coefficient)
        free = []
        for key, exp in monomial:
            if is_dynamic_key(key):
                free.append((key, exp))
                continue
            if key in values:
                number *= complex(values[key]) ** exp
            elif key in BUILTIN_VALUES:
                number *= BUILTIN_VALUES[key] ** exp
            else:
                raise KeyError(key)
        if number.imag == 0:
            number = number.real
        terms.append((number, tuple(free)))
    return BoundPolynomial(tuple(terms))


def evaluate_constant(poly: Polynomial, values: Mapping[str, float]) -> complex:
    bound = bind_constants(poly, values)
    if bound.variables:
        raise ValueError(f"expression still depends on {sorted(bound.variables)}")
    return complex(bound({}))

