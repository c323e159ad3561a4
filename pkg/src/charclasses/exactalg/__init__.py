"""Exact arithmetic kernel: scalars, rational functions, matrices, simplex integrals."""

from .matrix import Matrix, SingularMatrixError
from .parser import ParseError, UndeclaredIdentifierError, parse_expr
from .ratexpr import Context, RatExpr
from .scalar import Field, Scalar
from .simplex import simplex_integrate, simplex_var


def differentiate(f: RatExpr, v: str) -> RatExpr:
    return f.diff(v)


def conjugate(f: RatExpr) -> RatExpr:
    return f.conjugate()


def mat_inverse(m: Matrix) -> Matrix:
    return m.inverse()


__all__ = [
    "Context", "Field", "Matrix", "ParseError", "RatExpr", "Scalar",
    "SingularMatrixError", "UndeclaredIdentifierError", "conjugate",
    "differentiate", "mat_inverse", "parse_expr", "simplex_integrate", "simplex_var",
]
