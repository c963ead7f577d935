"""Expressions for rational maps: tokenizer, recursive-descent parser,
lowering to RationalMap and a printer that parses back to the same map.

    expr   := term (('+' | '-') term)*
    term   := factor (('*' | '/') factor)*
    factor := ('+' | '-') factor | base ('^' uint)?
    base   := literal | 'z' | '(' expr ')'

Literals are ``3``, ``2.5``, ``1e-3``, ``i``, ``2i``, ``2.5e1i``; ``3+2i`` is
the sum of two literals.  Juxtaposition (``2z``) is rejected.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterator, Union

from ..config import DEFAULT, Tolerances
from ..ratfunc import DegreeOverflowError, Polynomial, RationalMap

MAX_INPUT = 64 * 1024


class ExprSyntaxError(ValueError):
    """Parse failure at a character offset of the input."""

    def __init__(self, message: str, text: str, position: int):
        self.message = message
        self.text = text
        self.position = position
        super().__init__(f"{message} at column {position + 1}")

    def pretty(self) -> str:
        line = self.text.replace("\n", " ")
        return f"{self.message}\n  {line}\n  {' ' * self.position}^"


class ExponentError(ExprSyntaxError):
    """The right operand of ^ is not a non-negative integer literal."""


class LoweringError(ValueError):
    pass


# ---------------------------------------------------------------- AST


@dataclass(frozen=True)
class Literal:
    value: complex


@dataclass(frozen=True)
class Var:
    pass


@dataclass(frozen=True)
class Neg:
    operand: "Node"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Power:
    base: "Node"
    exponent: int


Node = Union[Literal, Var, Neg, BinOp, Power]


# ---------------------------------------------------------------- tokens

_NUMBER = r"(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?"
_TOKEN = re.compile(
    rf"(?P<ws>\s+)|(?P<imag>{_NUMBER}i)|(?P<num>{_NUMBER})|(?P<i>i)|(?P<z>z)|(?P<op>[-+*/^()])"
)


@dataclass(frozen=True)
class Token:
    kind: str  # num, imag, i, z, op, end
    text: str
    pos: int


def tokenize(text: str) -> Iterator[Token]:
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ExprSyntaxError(f"unexpected character {text[pos]!r}", text, pos)
        if m.lastgroup != "ws":
            yield Token(m.lastgroup, m.group(), pos)
        pos = m.end()
    yield Token("end", "", len(text))


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = list(tokenize(text))
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def advance(self) -> Token:
        t = self.tokens[self.i]
        self.i += 1
        return t

    def error(self, message: str, tok: Token | None = None, cls=ExprSyntaxError):
        tok = tok or self.tok
        return cls(message, self.text, tok.pos)

    def parse(self) -> Node:
        node = self.expr()
        if self.tok.kind != "end":
            if self.tok.kind in ("num", "imag", "i", "z") or self.tok.text == "(":
                raise self.error("implicit multiplication is not supported; write '*'")
            raise self.error(f"unexpected {self.tok.text!r}")
        return node

    def expr(self) -> Node:
        node = self.term()
        while self.tok.text in ("+", "-"):
            op = self.advance().text
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Node:
        node = self.factor()
        while self.tok.text in ("*", "/"):
            op = self.advance().text
            node = BinOp(op, node, self.factor())
        return node

    def factor(self) -> Node:
        if self.tok.text in ("+", "-"):
            sign = self.advance().text
            inner = self.factor()
            return Neg(inner) if sign == "-" else inner
        node = self.base()
        if self.tok.text == "^":
            self.advance()
            t = self.tok
            if t.kind == "num" and t.text.isdigit():
                self.advance()
                return Power(node, int(t.text))
            if t.text == "-":
                raise self.error("negative exponent; write 1/(...)^n instead", t, ExponentError)
            if t.kind in ("num", "imag", "i", "z") or t.text == "(":
                raise self.error("exponent must be a non-negative integer literal", t, ExponentError)
            raise self.error("missing exponent after '^'", t, ExponentError)
        return node

    def base(self) -> Node:
        t = self.tok
        if t.kind == "num":
            self.advance()
            return Literal(complex(float(t.text), 0.0))
        if t.kind == "imag":
            self.advance()
            return Literal(complex(0.0, float(t.text[:-1])))
        if t.kind == "i":
            self.advance()
            return Literal(1j)
        if t.kind == "z":
            self.advance()
            return Var()
        if t.text == "(":
            self.advance()
            node = self.expr()
            if self.tok.text != ")":
                raise self.error("expected ')'")
            self.advance()
            return node
        if t.kind == "end":
            raise self.error("unexpected end of input")
        raise self.error(f"unexpected {t.text!r}")


def parse_expr(text: str) -> Node:
    if not text or not text.strip():
        raise ExprSyntaxError("empty expression", text or "", 0)
    if len(text.encode()) > MAX_INPUT:
        raise ExprSyntaxError(f"expression longer than {MAX_INPUT} bytes", text[:80], 0)
    return _Parser(text).parse()


# ---------------------------------------------------------------- lowering


def lower(node: Node, tol: Tolerances = DEFAULT) -> RationalMap:
    """Rational arithmetic over the AST, reduced at every step."""
    r = _lower(node, tol)
    if max(r.num.degree, r.den.degree) > tol.degree_cap:
        raise DegreeOverflowError(f"degree {max(r.num.degree, r.den.degree)} exceeds cap {tol.degree_cap}")
    return r


def _lower(node: Node, tol: Tolerances) -> RationalMap:
    if isinstance(node, Literal):
        return RationalMap.constant(node.value)
    if isinstance(node, Var):
        return RationalMap.identity()
    if isinstance(node, Neg):
        return -_lower(node.operand, tol)
    if isinstance(node, Power):
        b = _lower(node.base, tol)
        deg = max(b.num.degree, b.den.degree, 0)
        if deg * node.exponent > tol.degree_cap:
            raise DegreeOverflowError(f"power of degree {deg * node.exponent} exceeds cap {tol.degree_cap}")
        return b**node.exponent
    left, right = _lower(node.left, tol), _lower(node.right, tol)
    for side in (left, right):
        if max(side.num.degree, side.den.degree) > tol.degree_cap:
            raise DegreeOverflowError(f"intermediate degree exceeds cap {tol.degree_cap}")
    if node.op == "+":
        return left + right
    if node.op == "-":
        return left - right
    if node.op == "*":
        return left * right
    if right.num.is_zero():
        raise LoweringError("division by the zero map")
    return left / right


def parse_map(text: str, tol: Tolerances = DEFAULT) -> RationalMap:
    return lower(parse_expr(text), tol)


# ---------------------------------------------------------------- printing


def format_complex(c: complex) -> str:
    """A literal the parser reads back exactly (repr gives round-trip floats)."""
    c = complex(c)
    re_, im = c.real, c.imag
    if im == 0:
        return repr(float(re_))
    im_txt = f"{repr(abs(im))}i"
    if re_ == 0:
        return f"-{im_txt}" if im < 0 else im_txt
    return f"({repr(float(re_))}{'-' if im < 0 else '+'}{im_txt})"


def format_polynomial(p: Polynomial) -> str:
    if p.is_zero():
        return "0.0"
    parts = []
    for k, c in enumerate(p.coeffs):
        if c == 0:
            continue
        mono = "" if k == 0 else ("z" if k == 1 else f"z^{k}")
        parts.append(format_complex(c) + ("" if not mono else f"*{mono}"))
    return " + ".join(parts)


def format_map(r: RationalMap) -> str:
    num = format_polynomial(r.num)
    if r.den.degree == 0 and r.den.coeffs[0] == 1:
        return num
    return f"({num})/({format_polynomial(r.den)})"


def coefficients(r: RationalMap) -> dict:
    return {
        "num": [complex(c) for c in r.num.coeffs],
        "den": [complex(c) for c in r.den.coeffs],
    }
