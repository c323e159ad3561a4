from __future__ import annotations

import random

import pytest

from charclasses import corpus, reps
from charclasses.acyclic import (NotAcyclicError, Superconnection, connect_equivalence,
                                 fedosov_superconnection, hodge_homotopy, is_flat, superconnection_square)
from charclasses.chern import secondary_class_real
from charclasses.cohomology import Exactness, is_exact
from charclasses.exactalg import Matrix
from charclasses.superbundle import (GConnection, Metric, SuperComplex, apply_equivalence, curvature,
                                     metric_connection)

from conftest import rand_poly


def identity_complex(ctx, r):
    """E^0 = E^1 = R^r with the identity differential."""
    rows = [[ctx.one if (a >= r and b == a - r) else ctx.zero for b in range(2 * r)] for a in range(2 * r)]
    return SuperComplex.graded(ctx, (r, r), Matrix(ctx, rows, 2 * r))


def doubled_connection(A, E, rng, r):
    names = list(A.chart.coords)
    omegas = []
    for _ in range(A.rank):
        B = Matrix(A.ctx, [[rand_poly(A.ctx, rng, names, 2) for _ in range(r)] for _ in range(r)], r)
        omegas.append(Matrix.block_diag(A.ctx, B, B))
    return GConnection(A, E, tuple(omegas))


def three_term(A, rng):
    """Acyclic 0 -> R -> R^2 -> R -> 0 with a commuting connection."""
    ctx = A.ctx
    E = SuperComplex.graded(ctx, (1, 2, 1), Matrix.from_sparse(ctx, 4, 4, [(1, 0, ctx.one), (2, 0, ctx.one),
                                                                          (3, 1, ctx.one), (3, 2, -ctx.one)]))
    names = list(A.chart.coords)
    omegas = []
    for _ in range(A.rank):
        al, be, p = (rand_poly(ctx, rng, names, 2) for _ in range(3))
        q, r = al - p, p - be
        s = al - r
        z = ctx.zero
        omegas.append(Matrix(ctx, [[al, z, z, z], [z, p, q, z], [z, r, s, z], [z, z, z, be]], 4))
    return E, GConnection(A, E, tuple(omegas))


def test_hodge_homotopy():
    A = corpus.tangent(2)
    E = identity_complex(A.ctx, 2)
    a = hodge_homotopy(E)
    assert E.partial @ a + a @ E.partial == -Matrix.identity(A.ctx, 4)
    rng = random.Random(1)
    E3, _ = three_term(A, rng)
    h = Metric(Matrix.parse(A.ctx, [["2", "0", "0", "0"], ["0", "1", "1", "0"], ["0", "1", "3", "0"],
                                     ["0", "0", "0", "1"]]), E3)
    a3 = hodge_homotopy(E3, h)
    assert E3.partial @ a3 + a3 @ E3.partial == -Matrix.identity(A.ctx, 4)


def test_non_acyclic_complex_rejected():
    ctx = corpus.tangent(1).ctx
    E = SuperComplex.graded(ctx, (1, 1))
    with pytest.raises(NotAcyclicError):
        hodge_homotopy(E)


def test_connect_equivalence_round_trip():
    A = corpus.tangent(2)
    rng = random.Random(2)
    E = identity_complex(A.ctx, 2)
    n1, n2 = doubled_connection(A, E, rng, 2), doubled_connection(A, E, rng, 2)
    theta = connect_equivalence(n1, n2, hodge_homotopy(E))
    assert apply_equivalence(n1, theta) == n2


def test_fedosov_on_identity_complex_with_curvature():
    A = corpus.tangent(3)
    rng = random.Random(3)
    E = identity_complex(A.ctx, 2)
    nb = doubled_connection(A, E, rng, 2)
    assert not curvature(nb).is_zero()
    S = fedosov_superconnection(E, nb)
    assert is_flat(S)
    assert S.shape_violations() == []


def test_fedosov_on_adjoint_representation():
    A = corpus.tangent_r2_twisted()
    rng = random.Random(4)
    aux = [Matrix(A.ctx, [[rand_poly(A.ctx, rng, ["x", "y"]) for _ in range(2)] for _ in range(2)], 2)
           for _ in range(2)]
    nb = reps.basic_connection(A, aux)
    assert not curvature(nb).is_zero()
    S = fedosov_superconnection(nb.complex, nb)
    assert all(v.is_zero() for v in superconnection_square(S).values())


def test_fedosov_three_term_uses_higher_pieces():
    A = corpus.tangent(3)
    rng = random.Random(5)
    E, nb = three_term(A, rng)
    assert nb.commutes_with_partial
    S = fedosov_superconnection(E, nb)
    assert is_flat(S)
    assert 3 in S.pieces


def test_fedosov_preconditions():
    A = corpus.tangent(2)
    E = identity_complex(A.ctx, 1)
    bad = GConnection(A, E, (Matrix.parse(A.ctx, [["x", "0"], ["0", "0"]]),) * 2)
    with pytest.raises(ValueError):
        fedosov_superconnection(E, bad)


def test_broken_superconnection_is_not_flat():
    A = corpus.tangent(2)
    rng = random.Random(6)
    E = identity_complex(A.ctx, 1)
    nb = doubled_connection(A, E, rng, 1)
    S = fedosov_superconnection(E, nb)
    assert S.pieces
    assert not is_flat(Superconnection(E, nb, {}))


def test_acyclic_complex_class_is_exact():
    A = corpus.tangent(2)
    rng = random.Random(7)
    E = identity_complex(A.ctx, 2)
    nb = doubled_connection(A, E, rng, 2)
    nm = metric_connection(Metric.identity(E), A)
    u = secondary_class_real(nb, nm, 1)
    res = is_exact(A, u)
    assert res.outcome is Exactness.EXACT
    assert res.primitive is not None
