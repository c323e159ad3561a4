"""Exactness and class comparison in algebroid cohomology.

Over a point the cochain complex is finite dimensional and everything is
decided by exact linear algebra.  Over a chart we search for primitives
with polynomial coefficients of bounded degree.  When the algebroid data and
the form are polynomial we can also refute exactness: if w = d(eta) for any
eta smooth near the origin, then the Taylor jet of w of order D - 1 lies in
the jet of d(polynomials of degree <= D), because d is a first-order operator
with polynomial coefficients.  Failure of that jet condition certifies that
w is not exact on any neighbourhood of the origin.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, combinations_with_replacement
from math import comb

from .algebroid import GForm, LieAlgebroid, d_algebroid
from .exactalg import Matrix, RatExpr
from .exactalg import linsolve


class NotClosedError(ValueError):
    pass


class Exactness(enum.Enum):
    EXACT = "EXACT"
    NOT_EXACT = "NOT_EXACT"
    NOT_FOUND_AT_TRUNCATION = "NOT_FOUND_AT_TRUNCATION"


class Comparison(enum.Enum):
    EQUAL = "EQUAL"
    NOT_EQUAL = "NOT_EQUAL"
    UNDECIDED_AT_TRUNCATION = "UNDECIDED_AT_TRUNCATION"


@dataclass(frozen=True)
class TruncationWindow:
    max_poly_degree: int

    def __post_init__(self):
        if self.max_poly_degree < 0:
            raise ValueError("truncation degree must be non-negative")

    @classmethod
    def default_for(cls, *forms: GForm) -> TruncationWindow:
        return cls(2 + max((f.max_coefficient_degree() for f in forms), default=0))


@dataclass(frozen=True)
class ExactnessResult:
    outcome: Exactness
    primitive: GForm | None = None
    detail: str = ""

    @property
    def exact(self) -> bool:
        return self.outcome is Exactness.EXACT


def _keys(n: int, k: int):
    return list(combinations(range(n), k)) if k >= 0 else []


def differential_matrix(A: LieAlgebroid, k: int) -> Matrix:
    """Matrix of d: C^k -> C^{k+1} in the basis of increasing index tuples."""
    src, dst = _keys(A.rank, k), _keys(A.rank, k + 1)
    row = {key: r for r, key in enumerate(dst)}
    entries = []
    for c, key in enumerate(src):
        for target, v in d_algebroid(A, GForm.basis(A.ctx, key)).components.items():
            entries.append((row[target], c, v))
    return Matrix.from_sparse(A.ctx, len(dst), len(src), entries)


def cohomology_dims(A: LieAlgebroid) -> tuple[int, ...]:
    """dim H^k for k = 0..n over a point (generic in any symbolic parameters)."""
    if not A.is_point:
        raise ValueError("cohomology dimensions are only computed over a point")
    A.require_valid()
    n = A.rank
    ranks = [differential_matrix(A, k).rank() for k in range(n)] + [0]
    return tuple(comb(n, k) - ranks[k] - (ranks[k - 1] if k else 0) for k in range(n + 1))


def _require_closed(A: LieAlgebroid, w: GForm) -> None:
    if not d_algebroid(A, w).is_zero():
        raise NotClosedError("form is not closed")


def is_exact(A: LieAlgebroid, w: GForm, window: TruncationWindow | None = None) -> ExactnessResult:
    A.require_valid()
    _require_closed(A, w)
    k = w.degree
    if w.is_zero():
        return ExactnessResult(Exactness.EXACT, GForm.zero(A.ctx, max(k - 1, 0)), "zero form")
    if k == 0:
        return ExactnessResult(Exactness.NOT_EXACT, None, "nonzero function")
    if A.is_point:
        return _point_exact(A, w)
    window = TruncationWindow.default_for(w) if window is None else window
    return _truncated_exact(A, w, window.max_poly_degree)


def _point_exact(A: LieAlgebroid, w: GForm) -> ExactnessResult:
    k = w.degree
    dm = differential_matrix(A, k - 1)
    rhs = Matrix(A.ctx, [[w[key]] for key in _keys(A.rank, k)], 1)
    sol = dm.solve(rhs)
    if sol is None:
        return ExactnessResult(Exactness.NOT_EXACT, None, "not in the image of d")
    prim = GForm(A.ctx, k - 1, {key: sol[c, 0] for c, key in enumerate(_keys(A.rank, k - 1))})
    if d_algebroid(A, prim) != w:
        raise AssertionError("primitive does not verify")
    return ExactnessResult(Exactness.EXACT, prim, "")


def _monomials(m: int, degree: int):
    out = []
    for d in range(degree + 1):
        for combo in combinations_with_replacement(range(m), d):
            e = [0] * m
            for a in combo:
                e[a] += 1
            out.append(tuple(e))
    return out


def _polynomial_data(A: LieAlgebroid) -> bool:
    vals = [v for row in A.anchor.entries for v in row]
    vals += [c for i in range(A.rank) for j in range(A.rank) for _, c in A.bracket_terms(i, j)]
    return all(v.is_polynomial() for v in vals)


def _truncated_exact(A: LieAlgebroid, w: GForm, D: int) -> ExactnessResult:
    ctx = A.ctx
    coords = A.chart.coords
    extra = set(ctx.variables) - set(coords)
    used = set().union(*(v.free_variables() for v in w.components.values()))
    data_vars = set()
    for row in A.anchor.entries:
        for v in row:
            data_vars |= v.free_variables()
    for i in range(A.rank):
        for j in range(A.rank):
            for _, c in A.bracket_terms(i, j):
                data_vars |= c.free_variables()
    if (used | data_vars) & extra:
        raise ValueError("truncated search needs coefficients free of symbolic parameters")
    k = w.degree
    pos = [ctx.index(x) for x in coords]
    scalars = [ctx.one, ctx.imag] if ctx.gaussian else [ctx.one]
    basis = []   # (key, monomial, scalar)
    images = []  # d of each basis element
    for key in _keys(A.rank, k - 1):
        for mono in _monomials(len(coords), D):
            f = ctx.one
            for a, e in enumerate(mono):
                if e:
                    f = f * ctx.var(coords[a]) ** e
            for s in scalars:
                basis.append((key, f * s))
                images.append(d_algebroid(A, GForm(ctx, k - 1, {key: f * s})))
    targets = _keys(A.rank, k)
    # rows: (target key, monomial exponents, real/imag part)
    rows_index: dict = {}
    cols: list[dict] = [dict() for _ in images]
    rhs: dict = {}

    def scatter(value: RatExpr, lcm, sink: dict, key):
        scale = lcm.exquo(value.den)
        for part, poly in ((0, value.re), (1, value.im)):
            if not poly:
                continue
            for monom, c in (poly * scale).items():
                reduced = tuple(monom[p] for p in pos)
                r = rows_index.setdefault((key, reduced, part), len(rows_index))
                sink[r] = sink.get(r, Fraction(0)) + Fraction(int(c.numerator), int(c.denominator))

    R = ctx.ring
    for key in targets:
        vals = [img[key] for img in images if img[key]] + ([w[key]] if w[key] else [])
        lcm = R.one
        for v in vals:
            lcm = lcm.lcm(v.den) if v.den != 1 else lcm
        for j, img in enumerate(images):
            if img[key]:
                scatter(img[key], lcm, cols[j], key)
        if w[key]:
            scatter(w[key], lcm, rhs, key)

    nrows = len(rows_index)
    row_info = [None] * nrows
    for info, r in rows_index.items():
        row_info[r] = info

    def solve(selected):
        a = [[cols[j].get(r, Fraction(0)) for j in range(len(images))] for r in selected]
        b = [[rhs.get(r, Fraction(0))] for r in selected]
        if not images:
            return None if any(x[0] for x in b) else []
        return linsolve.solve(a, b, Fraction(0))

    sol = solve(range(nrows))
    if sol is not None:
        prim_comps: dict = {}
        for (key, f), x in zip(basis, sol):
            if x[0]:
                term = f * ctx.const(x[0])
                prim_comps[key] = prim_comps[key] + term if key in prim_comps else term
        prim = GForm(ctx, k - 1, prim_comps)
        if d_algebroid(A, prim) != w:
            raise AssertionError("primitive does not verify")
        return ExactnessResult(Exactness.EXACT, prim, f"primitive with coefficients of degree <= {D}")
    if D >= 1 and _polynomial_data(A) and all(v.is_polynomial() for v in w.components.values()):
        low = [r for r in range(nrows) if sum(row_info[r][1]) <= D - 1]
        if solve(low) is None:
            return ExactnessResult(Exactness.NOT_EXACT, None,
                                   f"Taylor jet of order {D - 1} at the origin is not a jet of an exact form")
    return ExactnessResult(Exactness.NOT_FOUND_AT_TRUNCATION, None,
                           f"no primitive with coefficients of degree <= {D}")


def classes_equal(A: LieAlgebroid, w: GForm, eta: GForm,
                  window: TruncationWindow | None = None) -> tuple[Comparison, GForm | None]:
    if w.degree != eta.degree and w and eta:
        raise ValueError(f"comparing a {w.degree}-form with a {eta.degree}-form")
    diff = w - eta
    if diff.is_zero():
        diff = GForm.zero(A.ctx, max(w.degree, eta.degree))
    window = TruncationWindow.default_for(w, eta) if window is None else window
    res = is_exact(A, diff, window)
    if res.outcome is Exactness.EXACT:
        return Comparison.EQUAL, res.primitive
    if res.outcome is Exactness.NOT_EXACT:
        return Comparison.NOT_EQUAL, None
    return Comparison.UNDECIDED_AT_TRUNCATION, None
