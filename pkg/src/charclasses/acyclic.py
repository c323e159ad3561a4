"""Acyclic complexes: Hodge homotopy, equivalences and flat superconnections."""

from __future__ import annotations

from dataclasses import dataclass, field

from .exactalg import Matrix, SingularMatrixError
from .superbundle import (GConnection, HomotopyEquivalence, MatrixGForm, Metric, SuperComplex,
                          apply_equivalence, cov_ext_derivative, curvature, form_product,
                          supercommutator)


class NotAcyclicError(ValueError):
    pass


class RecursionInvariantError(AssertionError):
    """A layer of the flat-superconnection recursion failed to commute with the differential."""


def hodge_homotopy(E: SuperComplex, h: Metric | None = None) -> Matrix:
    """a = -(P^h P + P P^h)^{-1} P^h, so that P a + a P = -1."""
    h = Metric.identity(E) if h is None else h
    P = E.partial
    Ph = h.adjoint(P)
    lap = Ph @ P + P @ Ph
    try:
        inv = lap.inverse()
    except SingularMatrixError:
        raise NotAcyclicError("Laplacian is singular: complex not acyclic (or metric degenerate)") from None
    a = -(inv @ Ph)
    if P @ a + a @ P != -Matrix.identity(E.ctx, E.rank):
        raise RecursionInvariantError("Hodge homotopy fails [P, a] = -1")
    return a


def connect_equivalence(nabla: GConnection, nabla2: GConnection, a: Matrix) -> HomotopyEquivalence:
    """theta(e_i) = -(w'_i - w_i) a, so that apply_equivalence(nabla, theta) = nabla2."""
    for name, nb in (("first", nabla), ("second", nabla2)):
        if not nb.commutes_with_partial:
            raise ValueError(f"{name} connection does not commute with the differential")
    comps = {}
    for i, (w, w2) in enumerate(zip(nabla.omegas, nabla2.omegas)):
        comps[(i,)] = -((w2 - w) @ a)
    theta = HomotopyEquivalence(MatrixGForm(nabla.ctx, nabla.parities, 1, comps))
    if apply_equivalence(nabla, theta) != nabla2:
        raise RecursionInvariantError("equivalence does not reproduce the target connection")
    return theta


@dataclass(frozen=True, eq=False)
class Superconnection:
    """A = P + nabla + A_2 + A_3 + ..., pieces keyed by form degree."""

    complex: SuperComplex
    connection: GConnection
    pieces: dict = field(default_factory=dict)

    def piece(self, j: int) -> MatrixGForm:
        if j in self.pieces:
            return self.pieces[j]
        return MatrixGForm.zero(self.complex.ctx, self.complex.parities, j)

    @property
    def top(self) -> int:
        return max(self.pieces, default=1)

    def shape_violations(self) -> list[str]:
        """Pieces must map Z-degree q to q + 1 - j."""
        deg = self.complex.degrees
        out = []
        if deg is None:
            return ["complex is not Z-graded"]
        if not self.connection.preserves_zgrading:
            out.append("connection does not preserve the Z-grading")
        for j, form in sorted(self.pieces.items()):
            for key, m in form.items():
                for r, row in enumerate(m.entries):
                    for c, v in enumerate(row):
                        if v and deg[r] != deg[c] + 1 - j:
                            out.append(f"A_{j} component {tuple(k + 1 for k in key)} has an entry "
                                       f"from degree {deg[c]} to {deg[r]}")
        return out


def fedosov_superconnection(E: SuperComplex, nabla: GConnection, h: Metric | None = None) -> Superconnection:
    """Flat superconnection extending P + nabla on an acyclic Z-graded complex.

    Layer n of A^2 = 0 reads [P, A_n] = -u_{n-1} with
    u_{n-1} = d_nabla A_{n-1} + sum_{i+j=n; i,j>=2} A_i A_j (and u_1 = k);
    since [P, u] = 0 and [P, a] = -1, A_n = u_{n-1} a solves it.
    """
    if not E.zgraded:
        raise ValueError("a Z-graded complex is required")
    if not nabla.preserves_zgrading:
        raise ValueError("the connection must preserve the Z-grading")
    if not nabla.commutes_with_partial:
        raise ValueError("the connection must commute with the differential")
    a = hodge_homotopy(E, h)
    P = E.partial_form()
    n = nabla.algebroid.rank
    pieces: dict[int, MatrixGForm] = {}
    for deg in range(2, n + 1):
        if deg == 2:
            u = curvature(nabla)
        else:
            u = cov_ext_derivative(nabla, pieces.get(deg - 1, MatrixGForm.zero(E.ctx, E.parities, deg - 1)))
            for i in range(2, deg - 1):
                j = deg - i
                if i in pieces and j in pieces:
                    u = u + form_product(pieces[i], pieces[j])
        if u.is_zero():
            continue
        if not supercommutator(P, u).is_zero():
            raise RecursionInvariantError(f"layer {deg}: u does not commute with the differential")
        pieces[deg] = u.right_matrix(a)
    result = Superconnection(E, nabla, pieces)
    bad = result.shape_violations()
    if bad:
        raise RecursionInvariantError("; ".join(bad))
    return result


def superconnection_square(A: Superconnection) -> dict[int, MatrixGForm]:
    """A^2 split by form degree; every value is zero iff A is flat."""
    E, nabla = A.complex, A.connection
    ctx, par = E.ctx, E.parities
    P = E.partial_form()
    n = nabla.algebroid.rank
    out = {0: form_product(P, P), 1: cov_ext_derivative(nabla, P)}
    for deg in range(2, n + 1):
        total = curvature(nabla) if deg == 2 else MatrixGForm.zero(ctx, par, deg)
        total = total + supercommutator(P, A.piece(deg))
        if deg - 1 >= 2:
            total = total + cov_ext_derivative(nabla, A.piece(deg - 1))
        for i in range(2, deg - 1):
            if i in A.pieces and deg - i in A.pieces:
                total = total + form_product(A.pieces[i], A.pieces[deg - i])
        out[deg] = total
    return out


def is_flat(A: Superconnection) -> bool:
    return all(v.is_zero() for v in superconnection_square(A).values())
