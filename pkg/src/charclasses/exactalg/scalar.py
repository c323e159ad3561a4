"""Exact scalars in Q or Q(i)."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction


class Field(enum.Enum):
    RATIONAL = "Q"
    GAUSSIAN_RATIONAL = "Qi"

    @classmethod
    def parse(cls, tag: str) -> Field:
        for member in cls:
            if tag in (member.value, member.name):
                return member
        raise ValueError(f"unknown field tag {tag!r} (expected 'Q' or 'Qi')")


@dataclass(frozen=True)
class Scalar:
    re: Fraction
    im: Fraction = Fraction(0)
    field: Field = Field.RATIONAL

    def __post_init__(self):
        object.__setattr__(self, "re", Fraction(self.re))
        object.__setattr__(self, "im", Fraction(self.im))
        if self.field is Field.RATIONAL and self.im:
            raise ValueError("nonzero imaginary part in a rational scalar")

    def _coerce(self, other) -> Scalar:
        if isinstance(other, Scalar):
            return other
        if isinstance(other, (int, Fraction)):
            return Scalar(Fraction(other), Fraction(0), self.field)
        return NotImplemented

    def _join(self, other: Scalar) -> Field:
        if Field.GAUSSIAN_RATIONAL in (self.field, other.field):
            return Field.GAUSSIAN_RATIONAL
        return Field.RATIONAL

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return Scalar(self.re + other.re, self.im + other.im, self._join(other))

    __radd__ = __add__

    def __neg__(self):
        return Scalar(-self.re, -self.im, self.field)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return Scalar(self.re * other.re - self.im * other.im,
                      self.re * other.im + self.im * other.re,
                      self._join(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        norm = other.re ** 2 + other.im ** 2
        if not norm:
            raise ZeroDivisionError("division by zero scalar")
        inv = Scalar(other.re / norm, -other.im / norm, other.field)
        return self * inv

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def conjugate(self) -> Scalar:
        return Scalar(self.re, -self.im, self.field)

    def __str__(self):
        if not self.im:
            return str(self.re)
        if not self.re:
            return f"{self.im}*i"
        return f"{self.re} + {self.im}*i"
