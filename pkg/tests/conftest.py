from __future__ import annotations

import random
from itertools import combinations

import pytest

from charclasses import corpus
from charclasses.algebroid import GForm, LieAlgebroid
from charclasses.exactalg import Context, Matrix, RatExpr
from charclasses.superbundle import GConnection, Metric, SuperComplex


def rand_poly(ctx: Context, rng: random.Random, names, degree: int = 1, terms: int = 3) -> RatExpr:
    """Small random polynomial in ``names`` with integer coefficients in [-3, 3]."""
    out = ctx.zero
    for _ in range(terms):
        c = rng.randint(-3, 3)
        if not c:
            continue
        mono = ctx.const(c)
        for _ in range(rng.randint(0, degree)):
            if names:
                mono = mono * ctx.var(rng.choice(names))
        out = out + mono
    return out


def rand_scalar(ctx: Context, rng: random.Random) -> RatExpr:
    v = ctx.const(rng.randint(-3, 3))
    if ctx.gaussian and rng.random() < 0.5:
        v = v + ctx.imag * rng.randint(-2, 2)
    return v


def rand_entry(ctx, rng, names, degree=1):
    v = rand_poly(ctx, rng, names, degree)
    if ctx.gaussian and rng.random() < 0.3:
        v = v + ctx.imag * rand_poly(ctx, rng, names, degree, terms=1)
    return v


def rand_even_matrix(ctx, rng, parities, names, degree=1) -> Matrix:
    r = len(parities)
    rows = [[rand_entry(ctx, rng, names, degree) if parities[a] == parities[b] else ctx.zero
             for b in range(r)] for a in range(r)]
    return Matrix(ctx, rows, r)


def rand_odd_matrix(ctx, rng, parities, names, degree=1) -> Matrix:
    r = len(parities)
    rows = [[rand_entry(ctx, rng, names, degree) if parities[a] != parities[b] else ctx.zero
             for b in range(r)] for a in range(r)]
    return Matrix(ctx, rows, r)


def rand_complex(ctx, rng, r0: int, r1: int, with_partial: bool = True) -> SuperComplex:
    """Super pair with a random constant odd differential mapping even to odd."""
    r = r0 + r1
    rows = [[ctx.zero] * r for _ in range(r)]
    if with_partial:
        for a in range(r0, r):
            for b in range(r0):
                rows[a][b] = ctx.const(rng.randint(-2, 2))
    return SuperComplex.super_pair(ctx, r0, r1, Matrix(ctx, rows, r))


def rand_commuting_connection(A: LieAlgebroid, rng: random.Random, s: int = 1, s0: int = 1, s1: int = 1,
                              degree: int = 1) -> GConnection:
    """Random connection commuting with a constant differential.

    Even part U + U0, odd part U + U1, and the differential is the identity
    U -> U.  Commuting forces omega_even = [[a, 0], [x, c]] and
    omega_odd = [[a, e], [0, f]] in these blocks.
    """
    ctx = A.ctx
    names = list(A.chart.coords)
    ev, od = s + s0, s + s1
    r = ev + od
    P = [[ctx.zero] * r for _ in range(r)]
    for u in range(s):
        P[ev + u][u] = ctx.one
    E = SuperComplex.super_pair(ctx, ev, od, Matrix(ctx, P, r))
    rnd = lambda: rand_entry(ctx, rng, names, degree)
    omegas = []
    for _ in range(A.rank):
        w = [[ctx.zero] * r for _ in range(r)]
        for i in range(s):
            for j in range(s):
                w[i][j] = w[ev + i][ev + j] = rnd()
        for i in range(s0):
            for j in range(s):
                w[s + i][j] = rnd()
            for j in range(s0):
                w[s + i][s + j] = rnd()
        for i in range(s):
            for j in range(s1):
                w[ev + i][ev + s + j] = rnd()
        for i in range(s1):
            for j in range(s1):
                w[ev + s + i][ev + s + j] = rnd()
        omegas.append(Matrix(ctx, w, r))
    nb = GConnection(A, E, tuple(omegas))
    assert nb.commutes_with_partial
    return nb


def rand_connection(A: LieAlgebroid, E: SuperComplex, rng: random.Random, degree: int = 1) -> GConnection:
    names = list(A.chart.coords)
    return GConnection(A, E, tuple(rand_even_matrix(A.ctx, rng, E.parities, names, degree)
                                   for _ in range(A.rank)))


def rand_form(A: LieAlgebroid, k: int, rng: random.Random, degree: int = 2) -> GForm:
    names = list(A.chart.coords)
    comps = {key: rand_entry(A.ctx, rng, names, degree) for key in combinations(range(A.rank), k)
             if rng.random() < 0.8}
    return GForm(A.ctx, k, comps)


def rand_metric(E: SuperComplex, rng: random.Random, names=()) -> Metric:
    """Hermitian positive metric B^H B + 1 built block by block."""
    ctx = E.ctx
    r = E.rank
    grading = E.degrees if E.degrees is not None else E.parities
    rows = [[ctx.zero] * r for _ in range(r)]
    for a in range(r):
        for b in range(r):
            if grading[a] == grading[b]:
                rows[a][b] = rand_scalar(ctx, rng)
    B = Matrix(ctx, rows, r)
    H = B.H @ B + Matrix.identity(ctx, r)
    if names:
        bump = rand_poly(ctx, rng, list(names), 1, terms=1)
        H = H + Matrix.identity(ctx, r) * (bump * bump)
    return Metric(H, E)


def acceptance_corpus(field="Q"):
    """The four algebroids named by the acceptance criteria, plus a flat-frame plane."""
    return {
        "tangent_r2": corpus.tangent_r2_twisted(field),
        "tangent_r2_flat": corpus.tangent(2, field),
        "sl2": corpus.sl2(field),
        "aff2": corpus.aff2(field),
        "poisson_y": corpus.cotangent_poisson("y", field),
    }


def higher_rank_corpus(field="Q"):
    return {
        "sl2_x_tangent": corpus.product(corpus.sl2(field), corpus.tangent_r2_twisted(field)),
        "aff2_x_poisson": corpus.product(corpus.aff2(field), corpus.cotangent_poisson("y", field)),
    }


@pytest.fixture
def rng():
    return random.Random(20240611)


ACCEPTANCE_LINES: dict[int, str] = {}


def record_criterion(number: int, ok: bool, detail: str) -> None:
    ACCEPTANCE_LINES[number] = f"criterion {number}: {'PASS' if ok else 'FAIL'} - {detail}"
    print(ACCEPTANCE_LINES[number])


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[n])
