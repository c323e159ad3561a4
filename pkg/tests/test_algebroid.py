from __future__ import annotations

import random

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from charclasses import corpus
from charclasses.algebroid import (GForm, InvalidAlgebroidError, LieAlgebroid, Section, bracket,
                                   d_algebroid, shuffle_sign, wedge)
from charclasses.exactalg import Context

from conftest import acceptance_corpus, higher_rank_corpus, rand_form, rand_poly

ALL = {**acceptance_corpus(), **higher_rank_corpus(), "foliation": corpus.regular_foliation(),
       "tangent_r3": corpus.tangent(3)}


@pytest.mark.parametrize("name", sorted(ALL))
def test_corpus_is_valid(name):
    assert ALL[name].violations == ()


@pytest.mark.parametrize("name", sorted(ALL))
def test_d_squared_vanishes(name):
    A = ALL[name]
    rng = random.Random(name)
    for k in range(A.rank - 1):
        for _ in range(3):
            w = rand_form(A, k, rng)
            assert d_algebroid(A, d_algebroid(A, w)).is_zero()


@pytest.mark.parametrize("name", sorted(ALL))
def test_graded_leibniz_for_forms(name):
    A = ALL[name]
    rng = random.Random(name + "leibniz")
    for _ in range(4):
        p = rng.randint(0, A.rank)
        q = rng.randint(0, A.rank - p)
        a, b = rand_form(A, p, rng), rand_form(A, q, rng)
        lhs = d_algebroid(A, wedge(a, b))
        rhs = wedge(d_algebroid(A, a), b) + wedge(a, d_algebroid(A, b)).scale(A.ctx.const((-1) ** p))
        assert lhs == rhs


def test_wedge_graded_commutative():
    A = corpus.sl2()
    rng = random.Random(1)
    a, b = rand_form(A, 1, rng), rand_form(A, 2, rng)
    assert wedge(a, b) == wedge(b, a)
    c = rand_form(A, 1, rng)
    assert wedge(a, c) == -wedge(c, a)


def test_shuffle_sign():
    assert shuffle_sign((0,), (1,)) == 1
    assert shuffle_sign((1,), (0,)) == -1
    assert shuffle_sign((0, 2), (1,)) == -1
    assert shuffle_sign((1, 2), (0,)) == 1


def test_small_differentials():
    A = corpus.aff2()
    e2 = GForm.basis(A.ctx, (1,))
    assert d_algebroid(A, e2) == -GForm.basis(A.ctx, (0, 1))
    T = corpus.tangent(1)
    f = GForm.function(T.ctx.parse("x^2"))
    assert d_algebroid(T, f) == GForm(T.ctx, 1, {(0,): T.ctx.parse("2*x")})


def test_bracket_leibniz_rule():
    A = corpus.cotangent_poisson("x*y + y^2")
    ctx = A.ctx
    rng = random.Random(2)
    names = list(A.chart.coords)
    for _ in range(5):
        X = Section(tuple(rand_poly(ctx, rng, names) for _ in range(2)))
        Y = Section(tuple(rand_poly(ctx, rng, names) for _ in range(2)))
        f = rand_poly(ctx, rng, names, 2)
        rho_x_f = sum((X.coeffs[i] * A.rho(i, f) for i in range(2)), ctx.zero)
        assert bracket(A, X, Y.scale(f)) == bracket(A, X, Y).scale(f) + Y.scale(rho_x_f)
        assert bracket(A, X, Y) == bracket(A, Y, X).scale(-ctx.one)


def test_validation_reports_each_axiom():
    ctx = Context()
    bad = LieAlgebroid.build(ctx, (), [[], [], []], [(1, 2, 3, 1), (2, 3, 1, 1), (1, 3, 1, 1)])
    assert any("Jacobi" in v for v in bad.violations)
    with pytest.raises(InvalidAlgebroidError):
        bad.require_valid()
    ctx2 = Context(("x", "y"))
    not_morphism = LieAlgebroid.build(ctx2, ("x", "y"), [["1", "0"], ["0", "1"]], [(1, 2, 1, 1)])
    assert any("anchor" in v for v in not_morphism.violations)


def test_structure_entries_require_increasing_pair():
    with pytest.raises(ValueError):
        LieAlgebroid.build(Context(), (), [[], []], [(2, 1, 1, 1)])


# --- de Rham oracle: on TR^m in the coordinate frame d is the exterior derivative


def de_rham_oracle(components, coords):
    xs = sympy.symbols(coords)
    out = {}
    for key, f in components.items():
        fs = sympy.sympify(f.replace("^", "**"), locals=dict(zip(coords, xs)))
        for j, x in enumerate(xs):
            if j in key:
                continue
            new = tuple(sorted((j,) + key))
            sign = (-1) ** new.index(j)
            out[new] = out.get(new, 0) + sign * sympy.diff(fs, x)
    return {k: sympy.simplify(v) for k, v in out.items() if sympy.simplify(v) != 0}


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10 ** 6), st.integers(0, 2))
def test_tangent_differential_matches_de_rham(seed, k):
    A = corpus.tangent(3)
    rng = random.Random(seed)
    w = rand_form(A, k, rng, degree=3)
    got = d_algebroid(A, w)
    oracle = de_rham_oracle({key: str(v) for key, v in w.items()}, list(A.chart.coords))
    xs = sympy.symbols(A.chart.coords)
    mine = {key: sympy.sympify(str(v).replace("^", "**"), locals=dict(zip(A.chart.coords, xs)))
            for key, v in got.items()}
    assert set(mine) == set(oracle)
    for key in mine:
        assert sympy.simplify(mine[key] - oracle[key]) == 0


def test_gaussian_forms_conjugate():
    A = corpus.sl2("Qi")
    w = GForm(A.ctx, 1, {(0,): A.ctx.parse("1 + i"), (2,): A.ctx.parse("i")})
    assert not w.is_real()
    assert (w + w.conjugate()).is_real()
    assert d_algebroid(A, w.conjugate()) == d_algebroid(A, w).conjugate()


def test_form_key_validation():
    ctx = Context()
    with pytest.raises(ValueError):
        GForm(ctx, 2, {(1, 0): ctx.one})
    with pytest.raises(ValueError):
        GForm(ctx, 1, {(0, 1): ctx.one})
