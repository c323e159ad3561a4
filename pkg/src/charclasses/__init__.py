"""Exact characteristic and secondary classes of connections over Lie algebroids."""

from .algebroid import Chart, GForm, InvalidAlgebroidError, LieAlgebroid, d_algebroid, wedge
from .exactalg import Context, Field, Matrix, ParseError, RatExpr, parse_expr
from .superbundle import GConnection, MatrixGForm, Metric, SuperComplex, curvature, supertrace

__all__ = [
    "Chart", "Context", "Field", "GConnection", "GForm", "InvalidAlgebroidError", "LieAlgebroid",
    "Matrix", "MatrixGForm", "Metric", "ParseError", "RatExpr", "SuperComplex", "curvature",
    "d_algebroid", "parse_expr", "supertrace", "wedge",
]
