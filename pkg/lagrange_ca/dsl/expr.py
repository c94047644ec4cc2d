"""
Expression tree for Lagrangians and equations of motion.

Nodes are frozen dataclasses compared structurally. Parsed trees keep the
source order of terms and factors; constants inside a product are folded
into one leading coefficient.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

# ---------------------------------------------------------------------------
# Vocabulary
# ---------------------------------------------------------------------------
PARTICLE_VARIABLES = frozenset({"x"})
FIELD_VARIABLES = frozenset({"psi"})
OPAQUE_FUNCTIONS = frozenset({"V"})
NON_CONSTANTS = PARTICLE_VARIABLES | FIELD_VARIABLES | OPAQUE_FUNCTIONS

DEFAULT_CONSTANTS = frozenset(
    {"m", "k", "F", "v", "c_w", "nu", "psi0", "hbar", "q", "x0", "c", "pi", "i"}
)

# (variable, wrt) -> highest allowed order
ALLOWED_DERIVATIVES = {
    ("x", "t"): 2,
    ("psi", "t"): 2,
    ("psi", "x"): 2,
    ("V", "x"): 2,
}


class Expr:
    """Base class for expression nodes."""

    __slots__ = ()

    def __str__(self) -> str:
        return pretty_print(self)


@dataclass(frozen=True)
class Const(Expr):
    value: Fraction


@dataclass(frozen=True)
class Sym(Expr):
    name: str


@dataclass(frozen=True)
class Deriv(Expr):
    """Partial derivative of a vocabulary symbol: d(x,t), d2(psi,x), d(V,x)."""

    name: str
    wrt: str
    order: int = 1


@dataclass(frozen=True)
class Sum(Expr):
    terms: tuple[Expr, ...]


@dataclass(frozen=True)
class Prod(Expr):
    factors: tuple[Expr, ...]


@dataclass(frozen=True)
class Pow(Expr):
    base: Expr
    exp: int


ZERO = Const(Fraction(0))
ONE = Const(Fraction(1))


# ---------------------------------------------------------------------------
# Leaf keys
# ---------------------------------------------------------------------------
def leaf_key(node: Sym | Deriv) -> str:
    if isinstance(node, Sym):
        return node.name
    prefix = "d" if node.order == 1 else "d2"
    return f"{prefix}({node.name},{node.wrt})"


def leaf_from_key(key: str) -> Sym | Deriv:
    if key.startswith("d(") or key.startswith("d2("):
        prefix, rest = key.split("(", 1)
        name, wrt = rest.rstrip(")").split(",")
        return Deriv(name, wrt, 1 if prefix == "d" else 2)
    return Sym(key)


def is_dynamic_key(key: str) -> bool:
    return "(" in key or key in NON_CONSTANTS


def leaves(expr: Expr) -> set[str]:
    """Keys of every Sym and Deriv in the tree."""
    if isinstance(expr, (Sym, Deriv)):
        return {leaf_key(expr)}
    if isinstance(expr, Sum):
        return set().union(*(leaves(t) for t in expr.terms))
    if isinstance(expr, Prod):
        return set().union(*(leaves(f) for f in expr.factors))
    if isinstance(expr, Pow):
        return leaves(expr.base)
    return set()


# ---------------------------------------------------------------------------
# Smart constructors (shared by the parser and canonicalisation)
# ---------------------------------------------------------------------------
def make_sum(terms: list[Expr]) -> Expr:
    flat: list[Expr] = []
    for term in terms:
        if isinstance(term, Sum):
            flat.extend(term.terms)
        else:
            flat.append(term)
    if not flat:
        return ZERO
    if len(flat) == 1:
        return flat[0]
    return Sum(tuple(flat))


def make_prod(factors: list[Expr]) -> Expr:
    coefficient = Fraction(1)
    rest: list[Expr] = []
    for factor in factors:
        parts = factor.factors if isinstance(factor, Prod) else (factor,)
        for part in parts:
            if isinstance(part, Const):
                coefficient *= part.value
            else:
                rest.append(part)
    if coefficient == 0:
        return ZERO
    if coefficient != 1:
        rest.insert(0, Const(coefficient))
    if not rest:
        return ONE
    if len(rest) == 1:
        return rest[0]
    return Prod(tuple(rest))


def make_pow(base: Expr, exp: int) -> Expr:
    if isinstance(base, Const):
        return Const(base.value**exp)
    if exp == 1:
        return base
    return Pow(base, exp)


def negate(expr: Expr) -> Expr:
    if isinstance(expr, Const):
        return Const(-expr.value)
    if isinstance(expr, Prod) and isinstance(expr.factors[0], Const):
        return make_prod([Const(-expr.factors[0].value), *expr.factors[1:]])
    if isinstance(expr, Prod):
        return Prod((Const(Fraction(-1)), *expr.factors))
    return Prod((Const(Fraction(-1)), expr))


def is_negative(expr: Expr) -> bool:
    if isinstance(expr, Const):
        return expr.value < 0
    return (
        isinstance(expr, Prod)
        and isinstance(expr.factors[0], Const)
        and expr.factors[0].value < 0
    )


# ---------------------------------------------------------------------------
# Printing
# ---------------------------------------------------------------------------
_PREC_SUM, _PREC_PROD, _PREC_POW, _PREC_ATOM = 1, 2, 3, 4


def format_fraction(value: Fraction) -> str:
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def _precedence(expr: Expr) -> int:
    if isinstance(expr, Sum):
        return _PREC_SUM
    if isinstance(expr, Prod):
        return _PREC_PROD
    if isinstance(expr, Pow):
        return _PREC_POW if expr.exp > 0 else _PREC_PROD
    if isinstance(expr, Const):
        return _PREC_ATOM if expr.value.denominator == 1 and expr.value >= 0 else _PREC_PROD
    return _PREC_ATOM


def _wrap(expr: Expr, minimum: int) -> str:
    text = pretty_print(expr)
    return f"({text})" if _precedence(expr) < minimum else text


def pretty_print(expr: Expr) -> str:
    """Render a tree in the grammar it was parsed from; parse() inverts it."""
    if isinstance(expr, Const):
        return format_fraction(expr.value)
    if isinstance(expr, Sym):
        return "V(x)" if expr.name in OPAQUE_FUNCTIONS else expr.name
    if isinstance(expr, Deriv):
        return leaf_key(expr)
    if isinstance(expr, Sum):
        parts = [pretty_print(expr.terms[0])]
        for term in expr.terms[1:]:
            if is_negative(term):
                parts.append(f" - {_wrap(negate(term), _PREC_PROD)}")
            else:
                parts.append(f" + {_wrap(term, _PREC_PROD)}")
        return "".join(parts)
    if isinstance(expr, Prod):
        return _print_product(expr.factors)
    if isinstance(expr, Pow):
        if expr.exp < 0:
            return "1/" + _wrap(make_pow(expr.base, -expr.exp), _PREC_POW)
        return f"{_wrap(expr.base, _PREC_ATOM)}^{expr.exp}"
    raise TypeError(f"not an expression node: {expr!r}")


def _print_product(factors: tuple[Expr, ...]) -> str:
    out = ""
    rest = list(factors)
    if isinstance(rest[0], Const):
        coefficient = rest.pop(0).value
        out = "-" if coefficient == -1 else format_fraction(coefficient)
    for factor in rest:
        if isinstance(factor, Pow) and factor.exp < 0:
            if out in ("", "-"):
                out += "1"
            out += "/" + _wrap(make_pow(factor.base, -factor.exp), _PREC_POW)
            continue
        if out not in ("", "-"):
            out += "*"
        out += _wrap(factor, _PREC_POW)
    return out
