"""Recursive-descent parser for the rational expression grammar.

Precedence, tightest first: ``^`` (non-negative integer literal exponents),
unary ``-``, ``*`` ``/``, binary ``+`` ``-``.  ``i`` is the imaginary unit
when the context field is Q(i).
"""

from __future__ import annotations

import re

from .ratexpr import Context, RatExpr

_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z0-9_]*)|(.))")


class ParseError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


class UndeclaredIdentifierError(ParseError):
    pass


def _tokenize(text: str):
    tokens = []
    pos = 0
    while text[pos:].strip():
        m = _TOKEN.match(text, pos)
        start = m.start(m.lastindex)
        if m.group(1) is not None:
            tokens.append(("num", int(m.group(1)), start))
        elif m.group(2) is not None:
            tokens.append(("id", m.group(2), start))
        else:
            ch = m.group(3)
            if ch not in "+-*/^()":
                raise ParseError(f"unexpected character {ch!r}", start)
            tokens.append((ch, ch, start))
        pos = m.end()
    tokens.append(("end", None, len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, ctx: Context):
        self.ctx = ctx
        self.tokens = _tokenize(text)
        self.k = 0

    def peek(self):
        return self.tokens[self.k]

    def take(self, kind=None):
        tok = self.tokens[self.k]
        if kind is not None and tok[0] != kind:
            what = "end of input" if tok[0] == "end" else repr(tok[1])
            raise ParseError(f"expected {kind!r}, found {what}", tok[2])
        self.k += 1
        return tok

    def expr(self) -> RatExpr:
        value = self.term()
        while self.peek()[0] in "+-":
            op = self.take()[0]
            rhs = self.term()
            value = value + rhs if op == "+" else value - rhs
        return value

    def term(self) -> RatExpr:
        value = self.unary()
        while self.peek()[0] in ("*", "/"):
            op, _, pos = self.take()
            rhs = self.unary()
            if op == "*":
                value = value * rhs
            else:
                if not rhs:
                    raise ParseError("division by the zero polynomial", pos)
                value = value / rhs
        return value

    def unary(self) -> RatExpr:
        if self.peek()[0] == "-":
            self.take()
            return -self.unary()
        return self.power()

    def power(self) -> RatExpr:
        value = self.atom()
        while self.peek()[0] == "^":
            self.take()
            tok = self.peek()
            if tok[0] != "num":
                raise ParseError("exponent must be a non-negative integer literal", tok[2])
            self.take()
            value = value ** tok[1]
        return value

    def atom(self) -> RatExpr:
        kind, val, pos = self.peek()
        if kind == "num":
            self.take()
            return self.ctx.const(val)
        if kind == "id":
            self.take()
            if val == "i" and self.ctx.gaussian:
                return self.ctx.imag
            if val not in self.ctx.variables:
                raise UndeclaredIdentifierError(f"undeclared identifier {val!r}", pos)
            return self.ctx.var(val)
        if kind == "(":
            self.take()
            value = self.expr()
            self.take(")")
            return value
        what = "end of input" if kind == "end" else repr(val)
        raise ParseError(f"unexpected {what}", pos)


def parse_expr(text: str, ctx: Context) -> RatExpr:
    parser = _Parser(text, ctx)
    value = parser.expr()
    tok = parser.peek()
    if tok[0] != "end":
        raise ParseError(f"unexpected {tok[1]!r}", tok[2])
    return value
