"""Recursive-descent parser for polynomial expressions in ``z``.

Grammar (whitespace ignored)::

    expr    := term (("+" | "-") term)*
    term    := unary (["*"] unary)*
    unary   := "-" unary | "+" unary | power
    power   := atom ["^" integer]
    atom    := number ["i"] | "i" | "z" | "(" expr ")"

So ``1+2i``, ``(0.5-1i)*z^2``, ``2z^3 - z + 1`` and ``(z-1)^2`` all parse.
"""
from __future__ import annotations

import re

from .core import Polynomial

MAX_DEGREE = 64
_NUMBER = re.compile(r"(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?")


class ParseError(ValueError):
    def __init__(self, message: str, text: str, pos: int):
        self.pos = pos
        super().__init__(f"{message} at position {pos}: {text!r}")


def _add(a, b):
    n = max(len(a), len(b))
    return [(a[k] if k < len(a) else 0j) + (b[k] if k < len(b) else 0j) for k in range(n)]


def _mul(a, b):
    out = [0j] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] += x * y
    return out


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def error(self, msg):
        raise ParseError(msg, self.text, self.pos)

    def peek(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def parse(self):
        if not self.peek():
            self.error("empty expression")
        out = self.expr()
        if self.peek():
            self.error(f"unexpected {self.peek()!r}")
        return out

    def expr(self):
        acc = self.term()
        while self.peek() in ("+", "-"):
            sign = self.text[self.pos]
            self.pos += 1
            t = self.term()
            acc = _add(acc, t if sign == "+" else [-c for c in t])
        return acc

    def term(self):
        acc = self.unary()
        while True:
            c = self.peek()
            if c == "*":
                self.pos += 1
                acc = _mul(acc, self.unary())
            elif c and (c in "z(ij" or c.isdigit() or c == "."):
                acc = _mul(acc, self.power())
            else:
                return acc

    def power(self):
        base = self.atom()
        if self.peek() == "^":
            self.pos += 1
            self.peek()
            m = re.compile(r"\d+").match(self.text, self.pos)
            if not m:
                self.error("expected a nonnegative integer exponent")
            k = int(m.group())
            if k > MAX_DEGREE:
                self.error(f"exponent above {MAX_DEGREE}")
            self.pos = m.end()
            out = [1 + 0j]
            for _ in range(k):
                out = _mul(out, base)
            return out
        return base

    def unary(self):
        c = self.peek()
        if c == "-":
            self.pos += 1
            return [-v for v in self.unary()]
        if c == "+":
            self.pos += 1
            return self.unary()
        return self.power()

    def atom(self):
        c = self.peek()
        if c == "(":
            self.pos += 1
            inner = self.expr()
            if self.peek() != ")":
                self.error("expected ')'")
            self.pos += 1
            return inner
        if c == "z":
            self.pos += 1
            return [0j, 1 + 0j]
        if c in ("i", "j"):
            self.pos += 1
            return [1j]
        m = _NUMBER.match(self.text, self.pos)
        if m:
            self.pos = m.end()
            val = float(m.group())
            if self.pos < len(self.text) and self.text[self.pos] in "ij":
                self.pos += 1
                return [complex(0, val)]
            return [complex(val)]
        self.error("expected a number, 'z', 'i' or '('" if c else "unexpected end of input")


def parse_coeffs(text: str) -> list[complex]:
    """Ascending coefficients of the expression, trailing zeros removed."""
    c = _Parser(text).parse()
    while len(c) > 1 and c[-1] == 0:
        c.pop()
    return c


def parse_poly(text: str) -> Polynomial:
    c = parse_coeffs(text)
    if len(c) < 2:
        raise ParseError("polynomial must have degree >= 1", text, 0)
    return Polynomial(c)


def parse_complex(text: str) -> complex:
    """A constant expression such as ``1+2i``, ``-0.5i`` or ``3``."""
    c = parse_coeffs(text)
    if len(c) > 1:
        raise ParseError("expected a constant, found z", text, 0)
    return c[0]
