from __future__ import annotations

import random

import pytest

from charclasses import corpus
from charclasses.algebroid import GForm, d_algebroid
from charclasses.chern import FieldError
from charclasses.cohomology import classes_equal, Comparison
from charclasses.exactalg import Matrix
from charclasses.reps import (Splitting, SplittingError, adjoint_complex, aux_difference, basic_connection,
                              bott_representation, intrinsic_classes, regular_splitting_connection)
from charclasses.superbundle import apply_equivalence, curvature, flat_up_to_homotopy

from conftest import acceptance_corpus, higher_rank_corpus, rand_poly

ALL = {**acceptance_corpus(), **higher_rank_corpus(), "foliation": corpus.regular_foliation(),
       "tangent_r3": corpus.tangent(3), "tangent_r1": corpus.tangent(1), "one_dim": corpus.one_dim()}


def rand_aux(A, rng):
    names = list(A.chart.coords)
    n = A.rank
    return [Matrix(A.ctx, [[rand_poly(A.ctx, rng, names) for _ in range(n)] for _ in range(n)], n)
            for _ in range(A.chart.dim_m)]


def modular_oracle(A) -> GForm:
    """1/2 (trace of ad e_i + divergence of rho(e_i)), straight from the structure data."""
    ctx = A.ctx
    comps = {}
    for i in range(A.rank):
        acc = ctx.zero
        for k in range(A.rank):
            acc = acc + A.structure[i][k][k]
        for a, x in enumerate(A.chart.coords):
            acc = acc + A.anchor[i, a].diff(x)
        comps[(i,)] = acc / 2
    return GForm(ctx, 1, comps)


def foliation_splitting(A):
    p = lambda rows: Matrix.parse(A.ctx, rows)
    return Splitting(F=p([["1"], ["0"]]), alpha=p([["1"], ["0"]]), beta=p([["1", "0"]]),
                     K=p([["0"], ["1"]]), N=p([["0"], ["1"]]))


def test_adjoint_complex_uses_the_anchor():
    A = corpus.cotangent_poisson("y")
    E = adjoint_complex(A)
    assert E.ranks == (2, 2)
    assert E.partial.block(2, 4, 0, 2) == A.anchor.T


@pytest.mark.parametrize("name", sorted(ALL))
def test_basic_connections_flat_up_to_homotopy(name):
    A = ALL[name]
    rng = random.Random(name)
    for aux in (None, rand_aux(A, rng)):
        nb = basic_connection(A, aux)
        assert nb.commutes_with_partial
        assert flat_up_to_homotopy(nb) is not None


@pytest.mark.parametrize("name", ["tangent_r2", "poisson_y", "foliation", "aff2_x_poisson"])
def test_aux_difference_is_an_equivalence(name):
    A = ALL[name]
    rng = random.Random(name + "aux")
    aux, aux2 = rand_aux(A, rng), rand_aux(A, rng)
    theta = aux_difference(A, aux, aux2)
    assert apply_equivalence(basic_connection(A, aux2), theta) == basic_connection(A, aux)


@pytest.mark.parametrize("name", sorted(ALL))
def test_intrinsic_class_formula(name):
    A = ALL[name]
    rng = random.Random(name + "u")
    aux = rand_aux(A, rng)
    assert intrinsic_classes(A, 1, basic_connection(A, aux)) == modular_oracle(A)
    assert intrinsic_classes(A, 2).is_zero()


def test_intrinsic_values():
    assert intrinsic_classes(corpus.aff2(), 1) == GForm(corpus.aff2().ctx, 1, {(0,): corpus.aff2().ctx.const(1) / 2})
    P = corpus.cotangent_poisson("y")
    assert intrinsic_classes(P, 1) == GForm(P.ctx, 1, {(0,): P.ctx.one})
    for m in (1, 2, 3):
        assert intrinsic_classes(corpus.tangent(m), 1).is_zero()
    assert intrinsic_classes(corpus.tangent_r2_twisted(), 1).is_zero()


def test_intrinsic_classes_need_rational_field():
    with pytest.raises(FieldError):
        intrinsic_classes(corpus.aff2("Qi"), 1)


def test_splitting_validation():
    A = corpus.regular_foliation()
    good = foliation_splitting(A)
    assert good.violations(A) == []
    bad = Splitting(F=good.F, alpha=Matrix.parse(A.ctx, [["0"], ["1"]]), beta=good.beta, K=good.K, N=good.N)
    assert any("alpha" in v for v in bad.violations(A))
    with pytest.raises(SplittingError):
        regular_splitting_connection(A, bad)


def test_regular_splitting_connection_matches_basic_class():
    A = corpus.regular_foliation()
    s = foliation_splitting(A)
    nb = regular_splitting_connection(A, s)
    assert nb.commutes_with_partial
    assert d_algebroid(A, intrinsic_classes(A, 1, nb)).is_zero()
    verdict, _ = classes_equal(A, intrinsic_classes(A, 1, nb), intrinsic_classes(A, 1))
    assert verdict is Comparison.EQUAL


def test_bott_representations_are_flat():
    A = corpus.regular_foliation()
    b = bott_representation(A, foliation_splitting(A))
    assert curvature(b.kernel).is_zero()
    assert curvature(b.normal).is_zero()
    kd = b.formal_difference()
    assert kd.complex.ranks == (1, 1)


def test_kernel_minus_normal_on_a_lie_algebra():
    A = corpus.aff2()
    z = lambda r, c: Matrix.zeros(A.ctx, r, c)
    s = Splitting(F=z(0, 0), alpha=z(2, 0), beta=z(0, 0), K=Matrix.identity(A.ctx, 2), N=z(0, 0))
    b = bott_representation(A, s)
    kd = b.formal_difference()
    ug = intrinsic_classes(A, 1)
    uk = intrinsic_classes(A, 1, kd)
    verdict, _ = classes_equal(A, ug, uk)
    assert verdict is Comparison.EQUAL and not ug.is_zero()
