"""Chern character forms, Chern-Simons transgressions and flat secondary classes.

Forms over Delta^k x M are modelled on the product algebroid T(Delta^k) x g:
the k generators d/dt_a come first (indices 0..k-1), so the components that
survive fiber integration are exactly those whose index tuple starts with
(0, ..., k-1).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

from .algebroid import Chart, GForm, LieAlgebroid, shuffle_sign
from .exactalg import Field, Matrix, simplex_integrate, simplex_var
from .superbundle import (GConnection, Metric, MatrixGForm, SuperComplex, adjoint_connection,
                          curvature, flat_up_to_homotopy, form_product, supertrace)


class FieldError(ValueError):
    """Raised when a request needs a coefficient field the context lacks."""


@dataclass(frozen=True, eq=False)
class SimplexExtension:
    base: LieAlgebroid
    k: int
    algebroid: LieAlgebroid

    @property
    def t_names(self) -> tuple[str, ...]:
        return tuple(simplex_var(a + 1) for a in range(self.k))


@lru_cache(maxsize=128)
def simplex_extension(base: LieAlgebroid, k: int) -> SimplexExtension:
    if k < 0:
        raise ValueError("simplex dimension must be non-negative")
    if k == 0:
        return SimplexExtension(base, 0, base)
    base.require_valid()
    ts = tuple(simplex_var(a + 1) for a in range(k))
    clash = [t for t in ts if t in base.ctx.variables]
    if clash:
        raise ValueError(f"simplex parameters {clash} collide with declared variables")
    ctx = base.ctx.extend(ts)
    m, n = base.chart.dim_m, base.rank
    z, o = ctx.zero, ctx.one
    rows = [[z] * m + [o if b == a else z for b in range(k)] for a in range(k)]
    for i in range(n):
        rows.append([base.anchor[i, c].convert(ctx) for c in range(m)] + [z] * k)
    N = n + k
    grid = [[[z] * N for _ in range(N)] for _ in range(N)]
    for i in range(n):
        for j in range(n):
            for kk, c in base.bracket_terms(i, j):
                grid[i + k][j + k][kk + k] = c.convert(ctx)
    ext = LieAlgebroid(ctx, Chart(base.chart.coords + ts), N, Matrix(ctx, rows, m + k), grid,
                       trusted=True)
    return SimplexExtension(base, k, ext)


def affine_connection(*nablas: GConnection) -> GConnection:
    """(1 - sum t_a) w^0 + sum t_a w^a on e_i, zero on d/dt_a."""
    if not nablas:
        raise ValueError("need at least one connection")
    first = nablas[0]
    base = first.algebroid
    for nb in nablas[1:]:
        if nb.algebroid is not base:
            raise ValueError("connections over different algebroids")
        if nb.parities != first.parities:
            raise ValueError("connections on differently graded bundles")
    k = len(nablas) - 1
    if k == 0:
        return first
    ext = simplex_extension(base, k)
    ctx = ext.algebroid.ctx
    ts = [ctx.var(t) for t in ext.t_names]
    w0 = ctx.one
    for t in ts:
        w0 = w0 - t
    weights = [w0] + ts
    zero = Matrix.zeros(ctx, first.complex.rank)
    omegas = [zero] * k
    for i in range(base.rank):
        acc = zero
        for wt, nb in zip(weights, nablas):
            acc = acc + nb.omegas[i].convert(ctx) * wt
        omegas.append(acc)
    return GConnection(ext.algebroid, first.complex.convert(ctx), tuple(omegas))


def _supertrace_of_product(X: MatrixGForm, Y: MatrixGForm, keep=None) -> GForm:
    """Tr_s(X Y) without forming the full matrix product."""
    par = X.parities
    out: dict = {}
    odd_y = Y.degree % 2 == 1
    for I, A in X.components.items():
        for J, B in Y.components.items():
            s = shuffle_sign(I, J)
            if not s:
                continue
            K = tuple(sorted(I + J))
            if keep is not None and not keep(K):
                continue
            acc = X.ctx.zero
            r = len(par)
            for a in range(r):
                row = A.entries[a]
                for b in range(r):
                    u = row[b]
                    if not u:
                        continue
                    v = B.entries[b][a]
                    if not v:
                        continue
                    term = u * v
                    # odd endomorphism of A picks up the sign of Y's form degree
                    negative = par[a] == 1
                    if odd_y and par[a] != par[b]:
                        negative = not negative
                    acc = acc - term if negative else acc + term
            if s < 0:
                acc = -acc
            out[K] = out[K] + acc if K in out else acc
    return GForm(X.ctx, X.degree + Y.degree, out)


def _chern(nabla: GConnection, p: int, prefix: int = 0) -> GForm:
    A = nabla.algebroid
    ctx = A.ctx
    if p < 1:
        raise ValueError("p must be a positive integer")
    if 2 * p > A.rank:
        return GForm.zero(ctx, 2 * p)
    need = tuple(range(prefix))
    keep = (lambda K: K[:prefix] == need) if prefix else None
    k = curvature(nabla)
    if p == 1:
        ch = supertrace(k)
        return GForm(ctx, 2, {K: v for K, v in ch.components.items() if keep is None or keep(K)})
    power = k
    for _ in range(p - 2):
        power = form_product(power, k)
    return _supertrace_of_product(power, k, keep)


def chern_character(nabla: GConnection, p: int) -> GForm:
    """Tr_s(k^p), unnormalized."""
    return _chern(nabla, p)


def fiber_integrate(omega, ext: SimplexExtension):
    """Integrate a form over Delta^k x M along the simplex.

    The simplex slots are filled first, in the order d/dt_k, ..., d/dt_1;
    this orientation makes d cs = sum_i (-1)^i cs(.. omit i ..) hold for
    every k (the ascending order is off by (-1)^{k+1}).
    """
    k = ext.k
    base_ctx = ext.base.ctx
    if k == 0:
        return omega
    if omega.degree < k:
        if isinstance(omega, MatrixGForm):
            return MatrixGForm.zero(base_ctx, omega.parities, max(omega.degree - k, 0))
        return GForm.zero(base_ctx, max(omega.degree - k, 0))
    lead = tuple(range(k))
    flip = (k * (k - 1) // 2) % 2 == 1
    comps = {}
    for key, v in omega.components.items():
        if key[:k] != lead:
            continue
        new = tuple(i - k for i in key[k:])
        if isinstance(v, Matrix):
            val = v.map(lambda e: simplex_integrate(e, k)).convert(base_ctx)
        else:
            val = simplex_integrate(v, k).convert(base_ctx)
        comps[new] = -val if flip else val
    if isinstance(omega, MatrixGForm):
        return MatrixGForm(base_ctx, omega.parities, omega.degree - k, comps)
    return GForm(base_ctx, omega.degree - k, comps)


def chern_simons(nablas: Sequence[GConnection], p: int) -> GForm:
    """cs_p(nabla_0, ..., nabla_k): ch_p of the affine combination integrated over Delta^k."""
    nablas = tuple(nablas)
    k = len(nablas) - 1
    if k < 0:
        raise ValueError("need at least one connection")
    if 2 * p - k < 0:
        raise ValueError(f"cs_{p} of {k + 1} connections would have negative degree")
    base = nablas[0].algebroid
    if k == 0:
        return chern_character(nablas[0], p)
    ext = simplex_extension(base, k)
    ch = _chern(affine_connection(*nablas), p, prefix=k)
    return fiber_integrate(ch, ext)


def verify_stokes(nablas: Sequence[GConnection], p: int) -> GForm:
    """d cs_p(nabla_0..nabla_k) - sum_i (-1)^i cs_p(.. omit i ..); identically zero."""
    from .algebroid import d_algebroid
    nablas = tuple(nablas)
    A = nablas[0].algebroid
    residual = d_algebroid(A, chern_simons(nablas, p))
    for i in range(len(nablas)):
        term = chern_simons(nablas[:i] + nablas[i + 1:], p)
        residual = residual - term if i % 2 == 0 else residual + term
    return residual


def _i_power(ctx, n: int):
    """i^n as a RatExpr; real powers are allowed over Q."""
    n %= 4
    if n == 0:
        return ctx.one
    if n == 2:
        return -ctx.one
    if not ctx.gaussian:
        raise FieldError("this class carries an imaginary factor; use the Q(i) field")
    return ctx.imag if n == 1 else -ctx.imag


def secondary_class_ii(nabla0: GConnection, h: Metric, p: int) -> GForm:
    """i^{p+1} cs_p(nabla_0, nabla_0^h)."""
    if not nabla0.commutes_with_partial:
        raise ValueError("connection does not commute with the differential")
    factor = _i_power(nabla0.ctx, p + 1)
    return chern_simons((nabla0, adjoint_connection(nabla0, h)), p).scale(factor)


def secondary_class_i(nabla_l: GConnection, nabla0: GConnection, h: Metric, p: int) -> GForm:
    """i^{p+1} (cs_p(L, 0) + cs_p(0, 0^h) + cs_p(0^h, L^h)) for L flat up to homotopy."""
    for name, nb in (("nabla_L", nabla_l), ("nabla_0", nabla0)):
        if not nb.commutes_with_partial:
            raise ValueError(f"{name} does not commute with the differential")
    if flat_up_to_homotopy(nabla_l) is None:
        raise ValueError("nabla_L is not flat up to homotopy")
    factor = _i_power(nabla0.ctx, p + 1)
    l_h = adjoint_connection(nabla_l, h)
    o_h = adjoint_connection(nabla0, h)
    total = (chern_simons((nabla_l, nabla0), p) + chern_simons((nabla0, o_h), p)
             + chern_simons((o_h, l_h), p))
    return total.scale(factor)


def secondary_class_real(nabla0: GConnection, nabla_m: GConnection, p: int) -> GForm:
    """(-1)^{(p+1)/2} cs_p(nabla_0, nabla_m) for a real bundle and odd p."""
    if nabla0.ctx.field is not Field.RATIONAL:
        raise FieldError("the real pathway needs the Q field")
    if p % 2 == 0:
        raise ValueError("the real pathway is defined for odd p only (the class vanishes for even p)")
    sign = -1 if ((p + 1) // 2) % 2 else 1
    return chern_simons((nabla0, nabla_m), p).scale(sign)


def default_metric(E: SuperComplex) -> Metric:
    return Metric.identity(E)
