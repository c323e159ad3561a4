"""Standard small algebroids used by tests, examples and the scenario runner."""

from __future__ import annotations

import re

from .algebroid import LieAlgebroid
from .exactalg import Context, Field


def _ctx(variables, field) -> Context:
    return Context(tuple(variables), Field.parse(field) if isinstance(field, str) else field)


def abelian(n: int, field: Field | str = Field.RATIONAL, params=()) -> LieAlgebroid:
    ctx = _ctx(params, field)
    return LieAlgebroid.build(ctx, (), [[] for _ in range(n)]) if n else LieAlgebroid.build(ctx, (), [])


def one_dim(field: Field | str = Field.RATIONAL, params=("lam",)) -> LieAlgebroid:
    """The 1-dimensional Lie algebra; ``params`` are extra symbolic constants."""
    return abelian(1, field, params)


def aff2(field: Field | str = Field.RATIONAL, params=()) -> LieAlgebroid:
    """2-dimensional nonabelian Lie algebra, [e1, e2] = e2."""
    ctx = _ctx(params, field)
    return LieAlgebroid.build(ctx, (), [[], []], [(1, 2, 2, 1)])


def sl2(field: Field | str = Field.RATIONAL, params=()) -> LieAlgebroid:
    """Basis (H, E, F) with [H,E] = 2E, [H,F] = -2F, [E,F] = H."""
    ctx = _ctx(params, field)
    return LieAlgebroid.build(ctx, (), [[], [], []],
                              [(1, 2, 2, 2), (1, 3, 3, -2), (2, 3, 1, 1)])


def tangent(m: int, field: Field | str = Field.RATIONAL, params=()) -> LieAlgebroid:
    """TR^m in the coordinate frame (coordinates x, y, z, ... or x1..xm)."""
    coords = ("x", "y", "z")[:m] if m <= 3 else tuple(f"x{a+1}" for a in range(m))
    ctx = _ctx(coords + tuple(params), field)
    rows = [["1" if a == b else "0" for b in range(m)] for a in range(m)]
    return LieAlgebroid.build(ctx, coords, rows)


def tangent_r2_twisted(field: Field | str = Field.RATIONAL, params=()) -> LieAlgebroid:
    """TR^2 in the frame e1 = d/dx, e2 = x d/dx + d/dy, so [e1, e2] = e1."""
    ctx = _ctx(("x", "y") + tuple(params), field)
    return LieAlgebroid.build(ctx, ("x", "y"), [["1", "0"], ["x", "1"]], [(1, 2, 1, 1)])


def cotangent_poisson(f: str = "y", field: Field | str = Field.RATIONAL, params=()) -> LieAlgebroid:
    """T*R^2 for the bivector f d/dx ^ d/dy in the frame (dx, dy).

    rho(dx) = f d/dy, rho(dy) = -f d/dx, [dx, dy] = f_x dx + f_y dy.
    """
    ctx = _ctx(("x", "y") + tuple(params), field)
    fe = ctx.parse(f)
    fx, fy = fe.diff("x"), fe.diff("y")
    return LieAlgebroid.build(ctx, ("x", "y"), [["0", f], [str(-fe), "0"]],
                              [(1, 2, 1, fx), (1, 2, 2, fy)])


def regular_foliation(field: Field | str = Field.RATIONAL, params=()) -> LieAlgebroid:
    """Rank 2 over R^2: rho(e1) = d/dx, rho(e2) = 0, [e1, e2] = y e2.

    Regular with F spanned by d/dx, kernel spanned by e2 and normal bundle
    spanned by the class of d/dy.
    """
    ctx = _ctx(("x", "y") + tuple(params), field)
    return LieAlgebroid.build(ctx, ("x", "y"), [["1", "0"], ["0", "0"]], [(1, 2, 2, "y")])


def product(A: LieAlgebroid, B: LieAlgebroid) -> LieAlgebroid:
    """Direct product over the product chart; variable names must be disjoint."""
    if A.ctx.field is not B.ctx.field:
        raise ValueError("factors use different coefficient fields")
    shared = set(A.ctx.variables) & set(B.ctx.variables)
    if shared:
        raise ValueError(f"factors share variables {sorted(shared)}")
    ctx = Context(A.ctx.variables + B.ctx.variables, A.ctx.field)
    ma, mb = A.chart.dim_m, B.chart.dim_m
    rows = [[str(A.anchor[i, a]) for a in range(ma)] + ["0"] * mb for i in range(A.rank)]
    rows += [["0"] * ma + [str(B.anchor[i, b]) for b in range(mb)] for i in range(B.rank)]
    triples = []
    for X, off in ((A, 0), (B, A.rank)):
        for i in range(X.rank):
            for j in range(i + 1, X.rank):
                for k, c in X.bracket_terms(i, j):
                    triples.append((i + off + 1, j + off + 1, k + off + 1, str(c)))
    return LieAlgebroid.build(ctx, A.chart.coords + B.chart.coords, rows, triples)


def renamed(A: LieAlgebroid, mapping: dict[str, str]) -> LieAlgebroid:
    """Same algebroid with chart variables renamed."""
    ctx = Context(tuple(mapping.get(v, v) for v in A.ctx.variables), A.ctx.field)
    move = lambda e: ctx.parse(_rename(str(e), mapping))
    rows = [[move(A.anchor[i, a]) for a in range(A.chart.dim_m)] for i in range(A.rank)]
    triples = [(i + 1, j + 1, k + 1, move(c)) for i in range(A.rank) for j in range(i + 1, A.rank)
               for k, c in A.bracket_terms(i, j)]
    coords = tuple(mapping.get(v, v) for v in A.chart.coords)
    return LieAlgebroid.build(ctx, coords, rows, triples)


def _rename(text: str, mapping: dict[str, str]) -> str:
    return re.sub(r"[A-Za-z_][A-Za-z_0-9]*", lambda m: mapping.get(m.group(0), m.group(0)), text)


CORPUS = {
    "tangent_r1": lambda field=Field.RATIONAL: tangent(1, field),
    "tangent_r2": lambda field=Field.RATIONAL: tangent_r2_twisted(field),
    "sl2": sl2,
    "aff2": aff2,
    "poisson_y": lambda field=Field.RATIONAL: cotangent_poisson("y", field),
    "foliation": regular_foliation,
}
