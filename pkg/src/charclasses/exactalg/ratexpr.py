"""Exact rational functions over Q or Q(i).

A value ``(re + i*im) / den`` is stored with ``re``, ``im``, ``den`` polynomials
over Q in a shared variable context.  Keeping the denominator real makes the
canonical form cheap: ``den`` is monic (grlex leading coefficient 1) and
``gcd(re, im, den) = 1``.  Two expressions are equal iff their triples are.
"""

from __future__ import annotations

import re as _re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from sympy.polys.domains import QQ
from sympy.polys.orderings import grlex
from sympy.polys.rings import PolyRing

from .scalar import Field, Scalar

_IDENT = _re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


@lru_cache(maxsize=None)
def _poly_ring(variables: tuple[str, ...]) -> PolyRing:
    return PolyRing(variables, QQ, grlex)


def _qq(value) -> object:
    value = Fraction(value)
    return QQ(value.numerator, value.denominator)


def _frac(c) -> Fraction:
    return Fraction(int(c.numerator), int(c.denominator))


@dataclass(frozen=True)
class Context:
    """Ordered variable names plus the coefficient field.

    Chart coordinates come first, free parameters next, simplex parameters
    ``t1..tk`` last; the order fixes the monomial order of every expression.
    """

    variables: tuple[str, ...] = ()
    field: Field = Field.RATIONAL

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))
        if len(set(self.variables)) != len(self.variables):
            raise ValueError(f"duplicate variable names in {self.variables}")
        for name in self.variables:
            if not _IDENT.match(name):
                raise ValueError(f"invalid identifier {name!r}")
        if self.gaussian and "i" in self.variables:
            raise ValueError("'i' is reserved for the imaginary unit over Q(i)")

    @property
    def gaussian(self) -> bool:
        return self.field is Field.GAUSSIAN_RATIONAL

    @property
    def ring(self) -> PolyRing:
        return _poly_ring(self.variables)

    def index(self, name: str) -> int:
        try:
            return self.variables.index(name)
        except ValueError:
            raise KeyError(f"undeclared variable {name!r}") from None

    def extend(self, names) -> Context:
        return Context(self.variables + tuple(names), self.field)

    def with_field(self, field: Field) -> Context:
        return Context(self.variables, field)

    # constructors
    @property
    def zero(self) -> RatExpr:
        return RatExpr._raw(self, self.ring.zero, self.ring.zero, self.ring.one)

    @property
    def one(self) -> RatExpr:
        return RatExpr._raw(self, self.ring.one, self.ring.zero, self.ring.one)

    @property
    def imag(self) -> RatExpr:
        if not self.gaussian:
            raise ValueError("the imaginary unit needs the Q(i) field")
        return RatExpr._raw(self, self.ring.zero, self.ring.one, self.ring.one)

    def const(self, value) -> RatExpr:
        if isinstance(value, RatExpr):
            return value.convert(self)
        if isinstance(value, Scalar):
            if value.im and not self.gaussian:
                raise ValueError("imaginary constant in a rational context")
            R = self.ring
            return RatExpr._raw(self, R(_qq(value.re)), R(_qq(value.im)), R.one)
        R = self.ring
        return RatExpr._raw(self, R(_qq(value)), R.zero, R.one)

    def var(self, name: str) -> RatExpr:
        R = self.ring
        return RatExpr._raw(self, R.gens[self.index(name)], R.zero, R.one)

    def parse(self, text: str) -> RatExpr:
        from .parser import parse_expr
        return parse_expr(text, self)


def _normalize(ctx: Context, re, im, den) -> RatExpr:
    if not den:
        raise ZeroDivisionError("zero denominator")
    R = ctx.ring
    if not re and not im:
        return RatExpr._raw(ctx, R.zero, R.zero, R.one)
    if den.is_ground:
        c = den.LC
        if c != 1:
            re, im = re.quo_ground(c), im.quo_ground(c)
        return RatExpr._raw(ctx, re, im, R.one)
    g = re.gcd(den) if not im else re.gcd(im).gcd(den)
    if not g.is_ground:
        re, im, den = re.exquo(g), im.exquo(g), den.exquo(g)
    c = den.LC
    if c != 1:
        re, im, den = re.quo_ground(c), im.quo_ground(c), den.quo_ground(c)
    return RatExpr._raw(ctx, re, im, den)


class RatExpr:
    """Immutable canonical rational function; see module docstring."""

    __slots__ = ("ctx", "re", "im", "den", "_hash")

    def __init__(self, ctx: Context, re, im=None, den=None):
        R = ctx.ring
        re = R(re)
        im = R.zero if im is None else R(im)
        den = R.one if den is None else R(den)
        if im and not ctx.gaussian:
            raise ValueError("imaginary part in a rational context")
        n = _normalize(ctx, re, im, den)
        self.ctx, self.re, self.im, self.den = ctx, n.re, n.im, n.den
        self._hash = None

    @classmethod
    def _raw(cls, ctx, re, im, den) -> RatExpr:
        obj = object.__new__(cls)
        obj.ctx, obj.re, obj.im, obj.den = ctx, re, im, den
        obj._hash = None
        return obj

    # coercion
    def _coerce(self, other) -> RatExpr:
        if isinstance(other, RatExpr):
            if other.ctx != self.ctx:
                raise ValueError(
                    f"context mismatch: {self.ctx.variables} vs {other.ctx.variables}")
            return other
        if isinstance(other, (int, Fraction, Scalar)):
            return self.ctx.const(other)
        return NotImplemented

    # predicates
    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def is_zero(self) -> bool:
        return not self

    def is_polynomial(self) -> bool:
        return self.den == 1

    def is_constant(self) -> bool:
        return self.den == 1 and self.re.is_ground and self.im.is_ground

    def is_real(self) -> bool:
        return not self.im

    def constant_value(self) -> Scalar:
        if not self.is_constant():
            raise ValueError(f"{self} is not constant")
        return Scalar(_frac(self.re.LC) if self.re else 0,
                      _frac(self.im.LC) if self.im else 0, self.ctx.field)

    def free_variables(self) -> frozenset[str]:
        used = set()
        for p in (self.re, self.im, self.den):
            for monom in p.itermonoms():
                used.update(v for v, e in zip(self.ctx.variables, monom) if e)
        return frozenset(used)

    def degree(self) -> int:
        """Total degree of the numerator (-1 for zero)."""
        degs = [sum(m) for p in (self.re, self.im) for m in p.itermonoms()]
        return max(degs, default=-1)

    def __eq__(self, other):
        if isinstance(other, (int, Fraction, Scalar)):
            other = self.ctx.const(other)
        if not isinstance(other, RatExpr):
            return NotImplemented
        return (self.ctx == other.ctx and self.den == other.den
                and self.re == other.re and self.im == other.im)

    def __hash__(self):
        if self._hash is None:
            # sympy caches polynomial hashes, which go stale under in-place
            # arithmetic; hash the term dictionaries instead
            self._hash = hash((self.ctx, frozenset(self.re.items()), frozenset(self.im.items()),
                               frozenset(self.den.items())))
        return self._hash

    # arithmetic
    def __neg__(self):
        return RatExpr._raw(self.ctx, -self.re, -self.im, self.den)

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if not other:
            return self
        if not self:
            return other
        if self.den == other.den:
            return _normalize(self.ctx, self.re + other.re, self.im + other.im, self.den)
        return _normalize(self.ctx,
                          self.re * other.den + other.re * self.den,
                          self.im * other.den + other.im * self.den,
                          self.den * other.den)

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if not self or not other:
            return self.ctx.zero
        re = self.re * other.re
        im = self.re * other.im + self.im * other.re if (self.im or other.im) else self.ctx.ring.zero
        if self.im and other.im:
            re = re - self.im * other.im
        return _normalize(self.ctx, re, im, self.den * other.den)

    __rmul__ = __mul__

    def inverse(self) -> RatExpr:
        if not self:
            raise ZeroDivisionError("inverse of zero")
        # den / (re + i im) = den (re - i im) / (re^2 + im^2)
        norm = self.re * self.re + self.im * self.im
        return _normalize(self.ctx, self.den * self.re, -(self.den * self.im), norm)

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self * other.inverse()

    def __rtruediv__(self, other):
        return self.inverse() * other

    def __pow__(self, n: int):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return self.inverse() ** (-n)
        result, base = self.ctx.one, self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def conjugate(self) -> RatExpr:
        if not self.im:
            return self
        return RatExpr._raw(self.ctx, self.re, -self.im, self.den)

    def real_part(self) -> RatExpr:
        return _normalize(self.ctx, self.re, self.ctx.ring.zero, self.den)

    def imag_part(self) -> RatExpr:
        return _normalize(self.ctx, self.im, self.ctx.ring.zero, self.den)

    def diff(self, var: str) -> RatExpr:
        return _diff(self, var)

    def subs(self, var: str, value) -> RatExpr:
        """Substitute a rational constant for ``var``."""
        gen = self.ctx.ring.gens[self.ctx.index(var)]
        v = _qq(value)
        return _normalize(self.ctx, self.re.subs(gen, v), self.im.subs(gen, v),
                          self.den.subs(gen, v))

    def convert(self, ctx: Context) -> RatExpr:
        """Re-home into another context, matching variables by name."""
        if ctx == self.ctx:
            return self
        if self.im and not ctx.gaussian:
            raise ValueError("cannot move an imaginary value into a rational context")
        src = self.ctx.variables
        pos = {name: k for k, name in enumerate(ctx.variables)}
        R = ctx.ring

        def move(p):
            out = {}
            for monom, c in p.items():
                new = [0] * len(ctx.variables)
                for name, e in zip(src, monom):
                    if e:
                        if name not in pos:
                            raise ValueError(f"{self} depends on {name!r}, absent from target context")
                        new[pos[name]] = e
                out[tuple(new)] = c
            return R(out)

        return RatExpr._raw(ctx, move(self.re), move(self.im), move(self.den))

    def polynomial_terms(self) -> list[tuple[tuple[int, ...], Scalar]]:
        """(exponents, coefficient) pairs of a polynomial, grlex descending."""
        if self.den != 1:
            raise ValueError(f"{self} is not a polynomial")
        coeffs: dict[tuple[int, ...], list] = {}
        for monom, c in self.re.items():
            coeffs.setdefault(monom, [Fraction(0), Fraction(0)])[0] = _frac(c)
        for monom, c in self.im.items():
            coeffs.setdefault(monom, [Fraction(0), Fraction(0)])[1] = _frac(c)
        order = sorted(coeffs, key=lambda m: (sum(m), m), reverse=True)
        return [(m, Scalar(*coeffs[m], self.ctx.field)) for m in order]

    # printing
    def __str__(self):
        num = _format_numerator(self.ctx, self.re, self.im)
        if self.den == 1:
            return num
        return f"({num})/({_format_poly(self.ctx, self.den)})"

    def __repr__(self):
        return f"RatExpr({str(self)!r})"


@lru_cache(maxsize=1 << 16)
def _diff(f: RatExpr, var: str) -> RatExpr:
    ctx = f.ctx
    gen = ctx.ring.gens[ctx.index(var)]
    if f.den == 1:
        return RatExpr._raw(ctx, f.re.diff(gen), f.im.diff(gen), f.den)
    dd = f.den.diff(gen)
    return _normalize(ctx,
                      f.re.diff(gen) * f.den - f.re * dd,
                      f.im.diff(gen) * f.den - f.im * dd,
                      f.den * f.den)


def _format_monomial(names, monom) -> str:
    parts = []
    for name, e in zip(names, monom):
        if e == 1:
            parts.append(name)
        elif e:
            parts.append(f"{name}^{e}")
    return "*".join(parts)


def _format_term(names, monom, coeff: Fraction) -> str:
    mono = _format_monomial(names, monom)
    mag = abs(coeff)
    if not mono:
        return str(mag)
    if mag == 1:
        return mono
    return f"{mag}*{mono}"


def _format_poly(ctx: Context, p) -> str:
    if not p:
        return "0"
    out = []
    for monom, c in p.terms():
        c = _frac(c)
        term = _format_term(ctx.variables, monom, c)
        if not out:
            out.append(f"-{term}" if c < 0 else term)
        else:
            out.append(f" - {term}" if c < 0 else f" + {term}")
    return "".join(out)


def _format_numerator(ctx: Context, re, im) -> str:
    if not im:
        return _format_poly(ctx, re)
    if len(im) == 1:
        ((monom, c),) = im.items()
        c = _frac(c)
        body = _format_term(ctx.variables, monom, c)
        body = "i" if body == "1" else f"i*{body}"
        if not re:
            return f"-{body}" if c < 0 else body
        return f"{_format_poly(ctx, re)} {'-' if c < 0 else '+'} {body}"
    body = f"i*({_format_poly(ctx, im)})"
    if not re:
        return body
    return f"{_format_poly(ctx, re)} + {body}"
