"""
Recursive-descent parser for the Lagrangian DSL (grammar in docs/grammar.md).

    lagrangian = expr
    equation   = derivative "=" expr
    expr       = term { ("+" | "-") term }
    term       = unary { ("*" | "/") unary }
    unary      = "-" unary | power
    power      = atom [ "^" integer ]
    atom       = number | symbol | call | "(" expr ")"
"""
from __future__ import annotations

from collections.abc import Iterable
from fractions import Fraction

from lagrange_ca.dsl.expr import (
    ALLOWED_DERIVATIVES,
    DEFAULT_CONSTANTS,
    NON_CONSTANTS,
    Const,
    Deriv,
    Expr,
    Pow,
    Prod,
    Sym,
    make_pow,
    make_prod,
    make_sum,
    negate,
)
from lagrange_ca.dsl.lexer import Token, tokenize
from lagrange_ca.errors import LagrangianSyntaxError, UndeclaredSymbolError

DERIVATIVE_CALLS = {"d": 1, "d2": 2}


class Parser:
    def __init__(self, source: str, constants: Iterable[str] = ()):
        self.tokens = tokenize(source)
        self.pos = 0
        self.constants = DEFAULT_CONSTANTS | frozenset(constants)

    # -- token helpers ------------------------------------------------------
    @property
    def current(self) -> Token:
        return self.tokens[self.pos]

    def _peek(self, offset: int = 1) -> Token:
        return self.tokens[min(self.pos + offset, len(self.tokens) - 1)]

    def _advance(self) -> Token:
        token = self.current
        self.pos += 1
        return token

    def _expect(self, kind: str, what: str) -> Token:
        if self.current.type != kind:
            self._fail(f"expected {what}")
        return self._advance()

    def _fail(self, message: str, token: Token | None = None):
        token = token or self.current
        found = "end of input" if token.type == "EOF" else repr(token.value)
        raise LagrangianSyntaxError(f"{message}, found {found}", token.line, token.column)

    # -- entry points -------------------------------------------------------
    def parse_lagrangian(self) -> Expr:
        expr = self.expr()
        if self.current.type != "EOF":
            self._fail("unexpected trailing input")
        return expr

    def parse_equation(self) -> tuple[Deriv, Expr]:
        start = self.current
        lhs = self.unary()
        if not isinstance(lhs, Deriv):
            self._fail("left-hand side must be a time derivative", start)
        if lhs.wrt != "t":
            self._fail("left-hand side must be a time derivative", start)
        self._expect("EQUALS", "'='")
        rhs = self.expr()
        if self.current.type != "EOF":
            self._fail("unexpected trailing input")
        return lhs, rhs

    # -- grammar ------------------------------------------------------------
    def expr(self) -> Expr:
        terms = [self.term()]
        while self.current.type in ("PLUS", "MINUS"):
            op = self._advance()
            term = self.term()
            terms.append(term if op.type == "PLUS" else negate(term))
        return make_sum(terms)

    def term(self) -> Expr:
        factors = [self.unary()]
        while self.current.type in ("STAR", "SLASH"):
            op = self._advance()
            operand_token = self.current
            factor = self.unary()
            if op.type == "SLASH":
                factor = self._reciprocal(factor, operand_token)
            factors.append(factor)
        return make_prod(factors)

    def unary(self) -> Expr:
        if self.current.type == "MINUS":
            self._advance()
            return negate(self.unary())
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.current.type != "CARET":
            return base
        self._advance()
        token = self._expect("NUMBER", "an integer exponent")
        if not token.value.isdigit() or int(token.value) < 1:
            self._fail("exponent must be an integer >= 1", token)
        return make_pow(base, int(token.value))

    def atom(self) -> Expr:
        token = self.current
        if token.type == "NUMBER":
            self._advance()
            return Const(Fraction(token.value))
        if token.type == "LPAREN":
            self._advance()
            inner = self.expr()
            self._expect("RPAREN", "')'")
            return inner
        if token.type == "IDENT":
            if self._peek().type == "LPAREN" and token.value in DERIVATIVE_CALLS:
                return self._derivative()
            if self._peek().type == "LPAREN" and token.value == "V":
                return self._potential()
            self._advance()
            return self._symbol(token)
        self._fail("expected a number, symbol or '('")

    # -- pieces -------------------------------------------------------------
    def _symbol(self, token: Token) -> Sym:
        name = token.value
        if name not in NON_CONSTANTS and name not in self.constants:
            raise UndeclaredSymbolError(name, token.line, token.column)
        return Sym(name)

    def _derivative(self) -> Deriv:
        head = self._advance()
        order = DERIVATIVE_CALLS[head.value]
        self._expect("LPAREN", "'('")
        name = self._expect("IDENT", "a variable name")
        self._expect("COMMA", "','")
        wrt = self._expect("IDENT", "'t' or 'x'")
        self._expect("RPAREN", "')'")
        highest = ALLOWED_DERIVATIVES.get((name.value, wrt.value), 0)
        if order > highest:
            self._fail(f"unsupported derivative {head.value}({name.value},{wrt.value})", head)
        return Deriv(name.value, wrt.value, order)

    def _potential(self) -> Sym:
        self._advance()
        self._expect("LPAREN", "'('")
        self._expect_ident("x")
        if self.current.type == "COMMA":
            self._advance()
            self._expect_ident("t")
        self._expect("RPAREN", "')'")
        return Sym("V")

    def _expect_ident(self, name: str):
        if self.current.type != "IDENT" or self.current.value != name:
            self._fail(f"expected '{name}'")
        self._advance()

    def _reciprocal(self, divisor: Expr, token: Token) -> Expr:
        if isinstance(divisor, Const):
            if divisor.value == 0:
                self._fail("division by zero", token)
            return Const(1 / divisor.value)
        if isinstance(divisor, Sym) and divisor.name not in NON_CONSTANTS:
            return Pow(divisor, -1)
        if isinstance(divisor, Pow) and isinstance(divisor.base, Sym) and divisor.base.name not in NON_CONSTANTS:
            return make_pow(divisor.base, -divisor.exp)
        if isinstance(divisor, Prod):
            return make_prod([self._reciprocal(f, token) for f in divisor.factors])
        self._fail("division is only allowed by constants", token)


def parse(source: str, constants: Iterable[str] = ()) -> Expr:
    """Parse Lagrangian source text into an expression tree."""
    return Parser(source, constants).parse_lagrangian()


def parse_equation_text(source: str, constants: Iterable[str] = ()) -> tuple[Deriv, Expr]:
    """Parse `derivative = expr`; returns the left-hand derivative and the rhs tree."""
    return Parser(source, constants).parse_equation()
