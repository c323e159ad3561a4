"""The adjoint representation up to homotopy of a Lie algebroid and its classes.

Ad(g) is the two-term complex g -> TM with differential the anchor: g sits in
degree 0 (even), TM in degree 1 (odd).  Basis order is e_1..e_n followed by
d/dx_1..d/dx_m.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .algebroid import GForm, LieAlgebroid, Section, bracket
from .chern import FieldError, chern_simons
from .exactalg import Field, Matrix, RatExpr
from .superbundle import GConnection, Metric, SuperComplex, metric_connection


class SplittingError(ValueError):
    pass


def adjoint_complex(A: LieAlgebroid) -> SuperComplex:
    A.require_valid()
    n, m = A.rank, A.chart.dim_m
    entries = [(n + a, j, A.anchor[j, a]) for j in range(n) for a in range(m)]
    partial = Matrix.from_sparse(A.ctx, n + m, n + m, entries)
    return SuperComplex.graded(A.ctx, (n, m), partial)


def _vector_field_bracket(A: LieAlgebroid, v: Sequence[RatExpr], w: Sequence[RatExpr]) -> list[RatExpr]:
    coords = A.chart.coords
    out = []
    for a in range(len(coords)):
        acc = A.ctx.zero
        for b, xb in enumerate(coords):
            if v[b]:
                acc = acc + v[b] * w[a].diff(xb)
            if w[b]:
                acc = acc - w[b] * v[a].diff(xb)
        out.append(acc)
    return out


def _block_connection(A: LieAlgebroid, E: SuperComplex, blocks0, blocks1) -> GConnection:
    omegas = tuple(Matrix.block_diag(A.ctx, b0, b1) for b0, b1 in zip(blocks0, blocks1))
    return GConnection(A, E, omegas)


def basic_connection(A: LieAlgebroid, aux: Sequence[Matrix] | None = None) -> GConnection:
    """Linear connection on Ad(g) from an ordinary connection on the bundle g.

    ``aux[a]`` is n x n with column j holding the coefficients of
    nabla_{d/dx_a} e_j.  On E^0: nabla_X Y = [X, Y] + nabla_{rho Y} X; on E^1:
    nabla_X V = [rho X, V] + rho(nabla_V X).
    """
    A.require_valid()
    n, m, ctx = A.rank, A.chart.dim_m, A.ctx
    if aux is None:
        aux = [Matrix.zeros(ctx, n)] * m
    aux = list(aux)
    if len(aux) != m or any(g.shape != (n, n) for g in aux):
        raise ValueError(f"auxiliary connection needs {m} matrices of size {n}x{n}")
    R = A.anchor
    z = ctx.zero
    blocks0, blocks1 = [], []
    for i in range(n):
        w0 = [[z] * n for _ in range(n)]
        for j in range(n):
            for k, c in A.bracket_terms(i, j):
                w0[k][j] = w0[k][j] + c
            for a in range(m):
                r = R[j, a]
                if r:
                    for k in range(n):
                        if aux[a][k, i]:
                            w0[k][j] = w0[k][j] + r * aux[a][k, i]
        w1 = [[z] * m for _ in range(m)]
        for b, xb in enumerate(A.chart.coords):
            for a in range(m):
                v = -R[i, a].diff(xb)
                for l in range(n):
                    g = aux[b][l, i]
                    if g and R[l, a]:
                        v = v + g * R[l, a]
                w1[a][b] = v
        blocks0.append(Matrix(ctx, w0, n))
        blocks1.append(Matrix(ctx, w1, m))
    nabla = _block_connection(A, adjoint_complex(A), blocks0, blocks1)
    if not nabla.commutes_with_partial:
        raise AssertionError("basic connection fails to commute with the anchor")
    return nabla


def aux_difference(A: LieAlgebroid, aux: Sequence[Matrix], aux2: Sequence[Matrix]):
    """theta with apply_equivalence(basic(aux2), theta) = basic(aux).

    theta(e_i)(d/dx_b) = (nabla - nabla')_{d/dx_b}(e_i), an E^1 -> E^0 map.
    """
    from .superbundle import MatrixGForm
    n, m, ctx = A.rank, A.chart.dim_m, A.ctx
    E = adjoint_complex(A)
    comps = {}
    for i in range(n):
        entries = []
        for b in range(m):
            diff = aux[b] - aux2[b]
            for l in range(n):
                if diff[l, i]:
                    entries.append((l, n + b, diff[l, i]))
        comps[(i,)] = Matrix.from_sparse(ctx, n + m, n + m, entries)
    return MatrixGForm(ctx, E.parities, 1, comps)


def default_metric_connection(A: LieAlgebroid, E: SuperComplex | None = None) -> GConnection:
    E = adjoint_complex(A) if E is None else E
    return metric_connection(Metric.identity(E), A, E)


def intrinsic_classes(A: LieAlgebroid, p: int, nabla_bas: GConnection | None = None,
                      nabla_m: GConnection | None = None) -> GForm:
    """0 for even p; 1/2 (-1)^{(p+1)/2} cs_p(nabla_bas, nabla_m) for odd p."""
    if p < 1:
        raise ValueError("p must be a positive integer")
    if A.ctx.field is not Field.RATIONAL:
        raise FieldError("intrinsic classes are computed over the Q field")
    if p % 2 == 0:
        return GForm.zero(A.ctx, 2 * p - 1)
    nabla_bas = basic_connection(A) if nabla_bas is None else nabla_bas
    nabla_m = default_metric_connection(A, nabla_bas.complex) if nabla_m is None else nabla_m
    sign = -1 if ((p + 1) // 2) % 2 else 1
    half = A.ctx.const(sign) / 2
    return chern_simons((nabla_bas, nabla_m), p).scale(half)


@dataclass(frozen=True, eq=False)
class Splitting:
    """Frames for a regular algebroid.

    ``F`` (m x r): vector fields spanning F = rho(g).  ``alpha`` (n x r):
    alpha(f_s) in g.  ``beta`` (r x m): F-coordinates of beta(d/dx_a).
    ``K`` (n x q): sections spanning ker rho.  ``N`` (m x (m - r)): vector
    fields whose classes span the normal bundle.  K and N may be omitted
    when only the splitting connection is needed.
    """

    F: Matrix
    alpha: Matrix
    beta: Matrix
    K: Matrix | None = None
    N: Matrix | None = None

    @property
    def rank_f(self) -> int:
        return self.F.cols

    def violations(self, A: LieAlgebroid) -> list[str]:
        n, m, r = A.rank, A.chart.dim_m, self.rank_f
        ctx = A.ctx
        out = []
        if self.F.shape != (m, r) or self.alpha.shape != (n, r) or self.beta.shape != (r, m):
            return [f"splitting shapes must be F {m}x{r}, alpha {n}x{r}, beta {r}x{m}"]
        RT = A.anchor.T
        if RT @ self.alpha != self.F:
            out.append("rho o alpha is not the identity on F")
        if self.beta @ self.F != Matrix.identity(ctx, r):
            out.append("beta is not the identity on F")
        if self.F @ (self.beta @ RT) != RT:
            out.append("the image of the anchor is not contained in F")
        if self.K is not None:
            q = self.K.cols
            if self.K.rows != n or q + r != n:
                out.append(f"kernel frame must be {n}x{n - r}")
            elif not (RT @ self.K).is_zero():
                out.append("kernel frame is not annihilated by the anchor")
            elif not _hstack(ctx, self.K, self.alpha).det():
                out.append("kernel frame and alpha(F) do not span g")
        if self.N is not None:
            if self.N.rows != m or self.N.cols + r != m:
                out.append(f"normal frame must be {m}x{m - r}")
            elif not _hstack(ctx, self.N, self.F).det():
                out.append("normal frame and F do not span TM")
        return out

    def require(self, A: LieAlgebroid) -> None:
        bad = self.violations(A)
        if bad:
            raise SplittingError("; ".join(bad))


def _hstack(ctx, *mats: Matrix) -> Matrix:
    rows = mats[0].rows
    return Matrix(ctx, [sum((list(mt.entries[i]) for mt in mats), []) for i in range(rows)],
                  sum(mt.cols for mt in mats))


def _column(m: Matrix, j: int) -> list[RatExpr]:
    return [m[i, j] for i in range(m.rows)]


def regular_splitting_connection(A: LieAlgebroid, s: Splitting,
                                 nabla_f: Sequence[Matrix] | None = None) -> GConnection:
    """Basic connection built from a splitting and an F-connection on F.

    ``nabla_f[s]`` is r x r, column u holding the F-coordinates of
    nabla_{f_s} f_u.  On E^0: nabla_X Y = [X, Y - alpha rho Y] + alpha nabla_{rho X}(rho Y);
    on E^1: nabla_X V = [rho X, V] - beta[rho X, V] + nabla_{rho X}(beta V).
    """
    A.require_valid()
    s.require(A)
    n, m, r, ctx = A.rank, A.chart.dim_m, s.rank_f, A.ctx
    z = ctx.zero
    nabla_f = [Matrix.zeros(ctx, r)] * r if nabla_f is None else list(nabla_f)
    if len(nabla_f) != r or any(g.shape != (r, r) for g in nabla_f):
        raise ValueError(f"F-connection needs {r} matrices of size {r}x{r}")
    coords = A.chart.coords
    Bm = s.beta @ A.anchor.T          # F-coordinates of rho(e_j)
    P = s.alpha @ Bm                  # alpha rho on the frame of g

    def along_f(sidx: int, f: RatExpr) -> RatExpr:
        acc = z
        for a, xa in enumerate(coords):
            if s.F[a, sidx]:
                acc = acc + s.F[a, sidx] * f.diff(xa)
        return acc

    def cov_f(i: int, vec: list[RatExpr]) -> list[RatExpr]:
        """F-coordinates of nabla_{rho e_i}(sum vec_u f_u)."""
        out = [z] * r
        for sidx in range(r):
            w = Bm[sidx, i]
            if not w:
                continue
            for v in range(r):
                acc = along_f(sidx, vec[v])
                for u in range(r):
                    if nabla_f[sidx][v, u] and vec[u]:
                        acc = acc + nabla_f[sidx][v, u] * vec[u]
                out[v] = out[v] + w * acc
        return out

    blocks0, blocks1 = [], []
    for i in range(n):
        ei = A.basis_section(i)
        cols0 = []
        for j in range(n):
            zj = Section(tuple((ctx.one if k == j else z) - P[k, j] for k in range(n)))
            part = list(bracket(A, ei, zj).coeffs)
            fvec = cov_f(i, _column(Bm, j))
            for k in range(n):
                for u in range(r):
                    if s.alpha[k, u] and fvec[u]:
                        part[k] = part[k] + s.alpha[k, u] * fvec[u]
            cols0.append(part)
        blocks0.append(Matrix(ctx, [[cols0[j][k] for j in range(n)] for k in range(n)], n))
        rho_i = [A.anchor[i, a] for a in range(m)]
        cols1 = []
        for b in range(m):
            db = [ctx.one if a == b else z for a in range(m)]
            w = _vector_field_bracket(A, rho_i, db)
            bw = [sum((s.beta[u, a] * w[a] for a in range(m)), z) for u in range(r)]
            fv = cov_f(i, _column(s.beta, b))
            col = []
            for a in range(m):
                acc = w[a]
                for u in range(r):
                    if s.F[a, u]:
                        acc = acc + s.F[a, u] * (fv[u] - bw[u])
                col.append(acc)
            cols1.append(col)
        blocks1.append(Matrix(ctx, [[cols1[b][a] for b in range(m)] for a in range(m)], m))
    nabla = _block_connection(A, adjoint_complex(A), blocks0, blocks1)
    if not nabla.commutes_with_partial:
        raise SplittingError("splitting connection does not commute with the anchor")
    return nabla


@dataclass(frozen=True, eq=False)
class BottRepresentations:
    kernel: GConnection
    normal: GConnection

    def formal_difference(self) -> GConnection:
        """K - nu as one graded bundle (K even, nu odd, zero differential)."""
        A = self.kernel.algebroid
        q, v = self.kernel.complex.rank, self.normal.complex.rank
        E = SuperComplex.graded(A.ctx, (q, v))
        return _block_connection(A, E, self.kernel.omegas, self.normal.omegas)


def bott_representation(A: LieAlgebroid, s: Splitting) -> BottRepresentations:
    """Flat connections X.k = [X, k] on ker rho and X.v = [rho X, v] mod F on TM/F."""
    A.require_valid()
    if s.K is None or s.N is None:
        raise SplittingError("kernel and normal frames are required")
    s.require(A)
    n, m, ctx = A.rank, A.chart.dim_m, A.ctx
    q, nu = s.K.cols, s.N.cols
    frame_g = _hstack(ctx, s.K, s.alpha)
    frame_t = _hstack(ctx, s.N, s.F)
    k_rhs, n_rhs = [], []
    for i in range(n):
        ei = A.basis_section(i)
        for u in range(q):
            k_rhs.append(list(bracket(A, ei, Section(tuple(_column(s.K, u)))).coeffs))
        rho_i = [A.anchor[i, a] for a in range(m)]
        for u in range(nu):
            n_rhs.append(_vector_field_bracket(A, rho_i, _column(s.N, u)))
    k_omegas, n_omegas = [], []
    if q:
        sol = frame_g.solve(Matrix(ctx, [[c[row] for c in k_rhs] for row in range(n)], len(k_rhs)))
        for i in range(n):
            cols = range(i * q, (i + 1) * q)
            if any(sol[q + t, c] for t in range(n - q) for c in cols):
                raise SplittingError("bracket with the kernel frame leaves the kernel")
            k_omegas.append(Matrix(ctx, [[sol[v, c] for c in cols] for v in range(q)], q))
    else:
        k_omegas = [Matrix.zeros(ctx, 0)] * n
    if nu:
        sol = frame_t.solve(Matrix(ctx, [[c[row] for c in n_rhs] for row in range(m)], len(n_rhs)))
        for i in range(n):
            cols = range(i * nu, (i + 1) * nu)
            n_omegas.append(Matrix(ctx, [[sol[v, c] for c in cols] for v in range(nu)], nu))
    else:
        n_omegas = [Matrix.zeros(ctx, 0)] * n
    kernel = GConnection(A, SuperComplex.graded(ctx, (q,)), tuple(k_omegas))
    normal = GConnection(A, SuperComplex.graded(ctx, (nu,)), tuple(n_omegas))
    return BottRepresentations(kernel, normal)
