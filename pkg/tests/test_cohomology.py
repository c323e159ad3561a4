from __future__ import annotations

import random
from math import comb

import pytest

from charclasses import corpus
from charclasses.algebroid import GForm, d_algebroid
from charclasses.cohomology import (Comparison, Exactness, NotClosedError, TruncationWindow, classes_equal,
                                   cohomology_dims, is_exact)

from conftest import rand_form


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_abelian_dims_are_binomial(n):
    assert cohomology_dims(corpus.abelian(n)) == tuple(comb(n, k) for k in range(n + 1))


def test_small_lie_algebras():
    assert cohomology_dims(corpus.sl2()) == (1, 0, 0, 1)
    assert cohomology_dims(corpus.aff2()) == (1, 1, 0)
    assert cohomology_dims(corpus.product(corpus.sl2(), corpus.aff2())) == (1, 1, 0, 1, 1, 0)


def test_point_base_exactness_agrees_with_rank():
    A = corpus.sl2()
    rng = random.Random(1)
    for k in (1, 2, 3):
        for _ in range(5):
            w = d_algebroid(A, rand_form(A, k - 1, rng))
            res = is_exact(A, w)
            assert res.exact and d_algebroid(A, res.primitive) == w
    vol = GForm.basis(A.ctx, (0, 1, 2))
    assert is_exact(A, vol).outcome is Exactness.NOT_EXACT


def test_non_closed_input_rejected():
    A = corpus.aff2()
    with pytest.raises(NotClosedError):
        is_exact(A, GForm.basis(A.ctx, (1,)))


def test_positive_base_primitive_search():
    A = corpus.tangent_r2_twisted()
    rng = random.Random(2)
    for k in (1, 2):
        eta = rand_form(A, k - 1, rng, degree=2)
        w = d_algebroid(A, eta)
        res = is_exact(A, w)
        assert res.exact
        assert d_algebroid(A, res.primitive) == w


def test_truncation_can_leave_question_open():
    A = corpus.tangent(1)
    w = GForm(A.ctx, 1, {(0,): A.ctx.parse("x^5")})
    assert is_exact(A, w, TruncationWindow(3)).outcome is Exactness.NOT_FOUND_AT_TRUNCATION
    assert is_exact(A, w, TruncationWindow(6)).exact


def test_monotone_in_truncation():
    A = corpus.tangent(2)
    w = d_algebroid(A, GForm.function(A.ctx.parse("x^2*y + y^3")))
    found = [is_exact(A, w, TruncationWindow(D)).exact for D in range(0, 6)]
    first = found.index(True)
    assert all(found[first:])


def test_jet_obstruction_certifies_non_exactness():
    A = corpus.cotangent_poisson("y")
    w = GForm.basis(A.ctx, (0,))
    assert d_algebroid(A, w).is_zero()
    assert is_exact(A, w, TruncationWindow(4)).outcome is Exactness.NOT_EXACT


def test_rational_data_never_refuted():
    A = corpus.tangent(1)
    w = GForm(A.ctx, 1, {(0,): A.ctx.parse("1/(1 + x^2)")})
    assert is_exact(A, w, TruncationWindow(3)).outcome is Exactness.NOT_FOUND_AT_TRUNCATION


def test_compare_classes():
    A = corpus.aff2()
    e1, e2 = GForm.basis(A.ctx, (0,)), GForm.basis(A.ctx, (1,))
    assert classes_equal(A, e1, e1)[0] is Comparison.EQUAL
    assert classes_equal(A, e1, e1.scale(A.ctx.const(2)))[0] is Comparison.NOT_EQUAL
    with pytest.raises(NotClosedError):
        classes_equal(A, e1, e2)
    with pytest.raises(ValueError):
        classes_equal(A, e1, GForm.basis(A.ctx, (0, 1)))


def test_parameters_are_generic_at_point_base():
    A = corpus.one_dim(params=("lam",))
    w = GForm(A.ctx, 1, {(0,): A.ctx.parse("lam")})
    assert is_exact(A, w).outcome is Exactness.NOT_EXACT
