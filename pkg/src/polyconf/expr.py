"""Symbolic homology generators and their text grammar.

Grammar::

    point   := "x[" color "," index "]"
    curly   := "{" point ("," point)* "}"
    nested  := "{" point ("," point)* "," (curly | bracket) "}"
    bracket := "[" expr "," expr "]"
    product := term ("*" term)+
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Tuple, Union

from .errors import BracketInDimOne, ParseError
from .points import Point


@dataclass(frozen=True)
class Singleton:
    point: Point

    def points(self):
        return [self.point]

    def text(self):
        return str(self.point)

    def degree(self, d):
        return 0


@dataclass(frozen=True)
class Curly:
    """A sphere class on a set of points; stored sorted."""

    pts: Tuple[Point, ...]

    def __post_init__(self):
        object.__setattr__(self, "pts", tuple(sorted(Point(*p) for p in self.pts)))

    def points(self):
        return list(self.pts)

    def text(self):
        return "{" + ",".join(str(p) for p in self.pts) + "}"

    def degree(self, d):
        return (len(self.pts) - 1) * d - 1


@dataclass(frozen=True)
class Nested:
    """Outer sphere on ``outer`` plus a centre carrying the class ``inner``."""

    outer: Tuple[Point, ...]
    inner: "Expr"

    def __post_init__(self):
        object.__setattr__(self, "outer", tuple(sorted(Point(*p) for p in self.outer)))

    def points(self):
        return list(self.outer) + self.inner.points()

    def text(self):
        return "{" + ",".join(str(p) for p in self.outer) + "," + self.inner.text() + "}"

    def degree(self, d):
        # sphere on the outer points and a centre, times the inner class
        return len(self.outer) * d - 1 + self.inner.degree(d)


@dataclass(frozen=True)
class Bracket:
    left: "Expr"
    right: "Expr"

    def points(self):
        return self.left.points() + self.right.points()

    def text(self):
        return "[" + self.left.text() + "," + self.right.text() + "]"

    def degree(self, d):
        if d == 1:
            raise BracketInDimOne("brackets do not exist for d = 1")
        return self.left.degree(d) + self.right.degree(d) + d - 1


@dataclass(frozen=True)
class Product:
    factors: Tuple["Expr", ...]

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))

    def points(self):
        return [p for f in self.factors for p in f.points()]

    def text(self):
        return "*".join(f.text() for f in self.factors)

    def degree(self, d):
        return sum(f.degree(d) for f in self.factors)


Expr = Union[Singleton, Curly, Nested, Bracket, Product]


def degree(expr: Expr, d: int) -> int:
    return expr.degree(d)


def product(items) -> Expr:
    items = list(items)
    if len(items) == 1:
        return items[0]
    return Product(tuple(items))


def factors_of(expr: Expr) -> list:
    return list(expr.factors) if isinstance(expr, Product) else [expr]


def bracket_chain(first, rest) -> Expr:
    e = first
    for r in rest:
        e = Bracket(e, r)
    return e


_TOKEN = re.compile(r"\s*(x\[\s*\d+\s*,\s*\d+\s*\]|[{}\[\],*])")


def _tokens(text: str):
    pos = 0
    out = []
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected input at offset {pos}: {text[pos:pos + 10]!r}")
        out.append(m.group(1))
        pos = m.end()
        while pos < len(text) and text[pos].isspace():
            pos += 1
    return out


class _Parser:
    def __init__(self, text):
        self.toks = _tokens(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else None

    def take(self, want=None):
        t = self.peek()
        if t is None or (want is not None and t != want):
            raise ParseError(f"expected {want or 'token'}, found {t}")
        self.i += 1
        return t

    def expr(self):
        items = [self.term()]
        while self.peek() == "*":
            self.take("*")
            items.append(self.term())
        return product(items)

    def term(self):
        t = self.peek()
        if t is None:
            raise ParseError("unexpected end of input")
        if t.startswith("x["):
            self.take()
            c, i = (int(v) for v in t[2:-1].split(","))
            if c < 1 or i < 1:
                raise ParseError(f"colours and indices are 1-based: {t}")
            return Singleton(Point(c, i))
        if t == "[":
            self.take("[")
            left = self.expr()
            self.take(",")
            right = self.expr()
            self.take("]")
            return Bracket(left, right)
        if t == "{":
            self.take("{")
            pts = []
            inner = None
            while True:
                nxt = self.peek()
                if nxt in ("{", "["):
                    inner = self.term()
                    break
                p = self.term()
                if not isinstance(p, Singleton):
                    raise ParseError("curly brackets hold points")
                pts.append(p.point)
                if self.peek() != ",":
                    break
                self.take(",")
            self.take("}")
            if inner is not None:
                if not pts:
                    raise ParseError("nested class needs outer points")
                return Nested(tuple(pts), inner)
            if len(pts) < 2:
                raise ParseError("a sphere class needs at least two points")
            return Curly(tuple(pts))
        raise ParseError(f"unexpected token {t}")


def parse(text: str) -> Expr:
    p = _Parser(text)
    e = p.expr()
    if p.peek() is not None:
        raise ParseError(f"trailing input starting at {p.peek()}")
    return e


@dataclass(frozen=True)
class FormalSum:
    """A Z/2 linear combination of expressions (coefficients kept as ints)."""

    terms: Tuple[Tuple[int, "Expr"], ...]
    label: str = ""

    @classmethod
    def mod2(cls, exprs, label=""):
        count = {}
        order = []
        for e in exprs:
            key = e.text()
            if key not in count:
                order.append(e)
                count[key] = 0
            count[key] += 1
        return cls(tuple((1, e) for e in order if count[e.text()] % 2), label)

    def exprs(self):
        return [e for _, e in self.terms]

    def text(self):
        return " + ".join(e.text() for _, e in self.terms) + " = 0"
