"""Super-complexes, linear g-connections and End(E)-valued algebroid forms.

Sign conventions: an End(E)-valued form is a sum of (form) x (endomorphism)
and products follow (w x A)(n x B) = (-1)^{|A||n|} (w ^ n) x AB.  The
supercommutator uses total degree = form degree + endomorphism parity.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Mapping, Sequence

from .algebroid import GForm, LieAlgebroid, koszul, shuffle_sign
from .exactalg import Context, Matrix


class Parity(enum.Enum):
    EVEN = 0
    ODD = 1
    MIXED = 2


class GradingError(ValueError):
    pass


def _mask_split(m: Matrix, parities: Sequence[int]) -> tuple[Matrix, Matrix]:
    """(even part, odd part) of an endomorphism."""
    z = m.ctx.zero
    even = [[v if parities[i] == parities[j] else z for j, v in enumerate(row)]
            for i, row in enumerate(m.entries)]
    odd = [[z if parities[i] == parities[j] else v for j, v in enumerate(row)]
           for i, row in enumerate(m.entries)]
    return Matrix(m.ctx, even, m.cols), Matrix(m.ctx, odd, m.cols)


def endo_parity(m: Matrix, parities: Sequence[int]) -> Parity:
    has_even = has_odd = False
    for i, row in enumerate(m.entries):
        for j, v in enumerate(row):
            if v:
                if parities[i] == parities[j]:
                    has_even = True
                else:
                    has_odd = True
    if has_even and has_odd:
        return Parity.MIXED
    return Parity.ODD if has_odd else Parity.EVEN


@dataclass(frozen=True, eq=False)
class SuperComplex:
    """Graded bundle with an odd differential ``partial`` (column convention).

    ``parities`` gives the Z/2 degree of each basis vector.  For a Z-graded
    complex ``degrees`` also records the Z-degree and ``partial`` must raise
    it by exactly one.
    """

    ctx: Context
    partial: Matrix
    parities: tuple[int, ...]
    degrees: tuple[int, ...] | None = None

    def __post_init__(self):
        r = len(self.parities)
        object.__setattr__(self, "parities", tuple(p % 2 for p in self.parities))
        if self.degrees is not None:
            object.__setattr__(self, "degrees", tuple(self.degrees))
            if tuple(d % 2 for d in self.degrees) != self.parities:
                raise GradingError("parities must be the Z-degrees mod 2")
        if self.partial.shape != (r, r):
            raise ValueError(f"partial must be {r}x{r}")
        for i, row in enumerate(self.partial.entries):
            for j, v in enumerate(row):
                if not v:
                    continue
                if self.parities[i] == self.parities[j]:
                    raise GradingError(f"partial is not odd: entry ({i+1}, {j+1})")
                if self.degrees is not None and self.degrees[i] != self.degrees[j] + 1:
                    raise GradingError(f"partial does not raise the Z-degree: entry ({i+1}, {j+1})")
        if not (self.partial @ self.partial).is_zero():
            raise GradingError("partial does not square to zero")

    @classmethod
    def super_pair(cls, ctx: Context, r0: int, r1: int, partial: Matrix | None = None) -> SuperComplex:
        r = r0 + r1
        partial = Matrix.zeros(ctx, r) if partial is None else partial
        return cls(ctx, partial, (0,) * r0 + (1,) * r1)

    @classmethod
    def graded(cls, ctx: Context, ranks: Sequence[int], partial: Matrix | None = None) -> SuperComplex:
        degrees = tuple(d for d, r in enumerate(ranks) for _ in range(r))
        partial = Matrix.zeros(ctx, len(degrees)) if partial is None else partial
        return cls(ctx, partial, tuple(d % 2 for d in degrees), degrees)

    @property
    def rank(self) -> int:
        return len(self.parities)

    @property
    def zgraded(self) -> bool:
        return self.degrees is not None

    @property
    def ranks(self) -> tuple[int, ...]:
        if self.degrees is not None:
            top = max(self.degrees, default=-1)
            return tuple(self.degrees.count(d) for d in range(top + 1))
        return (self.parities.count(0), self.parities.count(1))

    def with_partial(self, partial: Matrix, keep_degrees: bool = False) -> SuperComplex:
        return SuperComplex(self.ctx, partial, self.parities, self.degrees if keep_degrees else None)

    def convert(self, ctx: Context) -> SuperComplex:
        return SuperComplex(ctx, self.partial.convert(ctx), self.parities, self.degrees)

    def same_grading(self, other: SuperComplex) -> bool:
        return self.parities == other.parities

    def partial_form(self) -> MatrixGForm:
        return MatrixGForm(self.ctx, self.parities, 0, {(): self.partial})


@dataclass(frozen=True, eq=False)
class Metric:
    """Hermitian form h(s, t) = s^H H t on E, grading-preserving."""

    H: Matrix
    complex: SuperComplex

    def __post_init__(self):
        E = self.complex
        if self.H.shape != (E.rank, E.rank):
            raise ValueError("metric size does not match the complex")
        if self.H != self.H.H:
            raise ValueError("metric is not hermitian")
        grading = E.degrees if E.degrees is not None else E.parities
        for i, row in enumerate(self.H.entries):
            for j, v in enumerate(row):
                if v and grading[i] != grading[j]:
                    raise GradingError(f"metric mixes degrees at ({i+1}, {j+1})")
        if not self.H.det():
            raise ValueError("metric is degenerate")

    @classmethod
    def identity(cls, E: SuperComplex) -> Metric:
        return cls(Matrix.identity(E.ctx, E.rank), E)

    @cached_property
    def inverse(self) -> Matrix:
        return self.H.inverse()

    def adjoint(self, m: Matrix) -> Matrix:
        """h-adjoint H^{-1} m^H H."""
        return self.inverse @ m.H @ self.H


@dataclass(frozen=True, eq=False)
class MatrixGForm:
    """End(E)-valued algebroid form of a fixed form degree."""

    ctx: Context
    parities: tuple[int, ...]
    degree: int
    components: Mapping[tuple[int, ...], Matrix] = field(default_factory=dict)

    def __post_init__(self):
        r = len(self.parities)
        comps = {}
        for key, m in self.components.items():
            key = tuple(key)
            if len(key) != self.degree or any(a >= b for a, b in zip(key, key[1:])):
                raise ValueError(f"bad index tuple {key} for a {self.degree}-form")
            if m.shape != (r, r):
                raise ValueError("component has the wrong size")
            if not m.is_zero():
                comps[key] = m
        object.__setattr__(self, "components", comps)
        object.__setattr__(self, "parities", tuple(self.parities))

    @classmethod
    def zero(cls, ctx: Context, parities, degree: int) -> MatrixGForm:
        return cls(ctx, tuple(parities), degree, {})

    @property
    def rank(self) -> int:
        return len(self.parities)

    @cached_property
    def endo_parity(self) -> Parity:
        kinds = {endo_parity(m, self.parities) for m in self.components.values()}
        if not kinds:
            return Parity.EVEN
        if len(kinds) == 1:
            return kinds.pop()
        return Parity.MIXED

    def __getitem__(self, key) -> Matrix:
        m = self.components.get(tuple(key))
        return Matrix.zeros(self.ctx, self.rank) if m is None else m

    def items(self):
        return sorted(self.components.items())

    def is_zero(self) -> bool:
        return not self.components

    def __bool__(self):
        return bool(self.components)

    def __eq__(self, other):
        if not isinstance(other, MatrixGForm):
            return NotImplemented
        if not self.components and not other.components:
            return True
        return self.degree == other.degree and self.components == other.components

    def _like(self, comps, degree=None) -> MatrixGForm:
        return MatrixGForm(self.ctx, self.parities, self.degree if degree is None else degree, comps)

    def __add__(self, other: MatrixGForm) -> MatrixGForm:
        if self.components and other.components and self.degree != other.degree:
            raise ValueError("adding forms of different degree")
        comps = dict(self.components)
        for k, m in other.components.items():
            comps[k] = comps[k] + m if k in comps else m
        return self._like(comps, self.degree if self.components else other.degree)

    def __neg__(self) -> MatrixGForm:
        return self._like({k: -m for k, m in self.components.items()})

    def __sub__(self, other: MatrixGForm) -> MatrixGForm:
        return self + (-other)

    def scale(self, f) -> MatrixGForm:
        f = self.ctx.const(f)
        return self._like({k: m * f for k, m in self.components.items()})

    __rmul__ = scale

    def map(self, fn: Callable[[Matrix], Matrix]) -> MatrixGForm:
        return self._like({k: fn(m) for k, m in self.components.items()})

    def convert(self, ctx: Context) -> MatrixGForm:
        return MatrixGForm(ctx, self.parities, self.degree,
                           {k: m.convert(ctx) for k, m in self.components.items()})

    def split(self) -> tuple[MatrixGForm, MatrixGForm]:
        """(endomorphism-even part, endomorphism-odd part)."""
        ev, od = {}, {}
        for k, m in self.components.items():
            ev[k], od[k] = _mask_split(m, self.parities)
        return self._like(ev), self._like(od)

    def right_matrix(self, a: Matrix) -> MatrixGForm:
        """Multiply every component on the right by a 0-form endomorphism."""
        return self._like({k: m @ a for k, m in self.components.items()})

    def __mul__(self, other: MatrixGForm) -> MatrixGForm:
        return form_product(self, other)

    def __str__(self):
        if not self.components:
            return "0"
        return " + ".join(f"{m}*" + ("^".join(f"e{i+1}" for i in k) or "1") for k, m in self.items())


def form_product(X: MatrixGForm, Y: MatrixGForm) -> MatrixGForm:
    """(w x A)(n x B) = (-1)^{|A||n|} (w ^ n) x AB."""
    if X.parities != Y.parities:
        raise ValueError("forms act on differently graded bundles")
    odd_y = Y.degree % 2 == 1
    out: dict = {}
    for I, A in X.components.items():
        if odd_y:
            A_even, A_odd = _mask_split(A, X.parities)
        for J, B in Y.components.items():
            s = shuffle_sign(I, J)
            if not s:
                continue
            if odd_y:
                M = A_even @ B - A_odd @ B
            else:
                M = A @ B
            if s < 0:
                M = -M
            K = tuple(sorted(I + J))
            out[K] = out[K] + M if K in out else M
    return MatrixGForm(X.ctx, X.parities, X.degree + Y.degree, out)


def _homogeneous(X: MatrixGForm):
    """Pieces of X with a definite total parity."""
    if X.endo_parity is Parity.EVEN:
        return [(X.degree % 2, X)]
    if X.endo_parity is Parity.ODD:
        return [((X.degree + 1) % 2, X)]
    ev, od = X.split()
    return [(X.degree % 2, ev), ((X.degree + 1) % 2, od)]


def supercommutator(X: MatrixGForm, Y: MatrixGForm) -> MatrixGForm:
    """[X, Y] = XY - (-1)^{|X||Y|} YX in total degree, extended bilinearly."""
    out = MatrixGForm.zero(X.ctx, X.parities, X.degree + Y.degree)
    for px, x in _homogeneous(X):
        for py, y in _homogeneous(Y):
            xy, yx = form_product(x, y), form_product(y, x)
            out = out + (xy + yx if px and py else xy - yx)
    return out


@dataclass(frozen=True, eq=False)
class GConnection:
    """Linear g-connection: nabla_{e_i} = rho(e_i) + omegas[i] on coefficient vectors."""

    algebroid: LieAlgebroid
    complex: SuperComplex
    omegas: tuple[Matrix, ...]

    def __post_init__(self):
        A, E = self.algebroid, self.complex
        A.require_valid()
        object.__setattr__(self, "omegas", tuple(self.omegas))
        if len(self.omegas) != A.rank:
            raise ValueError(f"need {A.rank} coefficient matrices, got {len(self.omegas)}")
        if A.ctx != E.ctx:
            raise ValueError("algebroid and complex live in different contexts")
        for i, w in enumerate(self.omegas):
            if w.shape != (E.rank, E.rank):
                raise ValueError(f"omega_{i+1} has shape {w.shape}, expected {E.rank}x{E.rank}")
            if endo_parity(w, E.parities) is not Parity.EVEN:
                raise GradingError(f"omega_{i+1} does not preserve the grading")

    @classmethod
    def trivial(cls, A: LieAlgebroid, E: SuperComplex) -> GConnection:
        z = Matrix.zeros(A.ctx, E.rank)
        return cls(A, E, (z,) * A.rank)

    @property
    def ctx(self) -> Context:
        return self.algebroid.ctx

    @property
    def parities(self) -> tuple[int, ...]:
        return self.complex.parities

    def act(self, i: int, m: Matrix) -> Matrix:
        """Induced connection on End(E): [nabla_{e_i}, m]."""
        w = self.omegas[i]
        return self.algebroid.rho_matrix(i, m) + (w @ m - m @ w)

    def partial_defect(self, i: int) -> Matrix:
        """rho(e_i)(partial) + [omega_i, partial]; zero iff nabla_{e_i} commutes with partial."""
        return self.act(i, self.complex.partial)

    @cached_property
    def commutes_with_partial(self) -> bool:
        return all(self.partial_defect(i).is_zero() for i in range(self.algebroid.rank))

    @cached_property
    def preserves_zgrading(self) -> bool:
        deg = self.complex.degrees
        if deg is None:
            return False
        return all(not v or deg[a] == deg[b]
                   for w in self.omegas for a, row in enumerate(w.entries) for b, v in enumerate(row))

    def with_complex(self, E: SuperComplex) -> GConnection:
        return GConnection(self.algebroid, E, self.omegas)

    def __eq__(self, other):
        if not isinstance(other, GConnection):
            return NotImplemented
        return self.omegas == other.omegas and self.complex.parities == other.complex.parities

    __hash__ = object.__hash__


def curvature(nabla: GConnection) -> MatrixGForm:
    """k(e_i, e_j) = rho_i(w_j) - rho_j(w_i) + [w_i, w_j] - sum_k c_ij^k w_k."""
    A = nabla.algebroid
    w = nabla.omegas
    comps = {}
    for i in range(A.rank):
        for j in range(i + 1, A.rank):
            m = A.rho_matrix(i, w[j]) - A.rho_matrix(j, w[i]) + (w[i] @ w[j] - w[j] @ w[i])
            for k, c in A.bracket_terms(i, j):
                m = m - w[k] * c
            comps[(i, j)] = m
    return MatrixGForm(A.ctx, nabla.parities, 2, comps)


def cov_ext_derivative(nabla: GConnection, omega: MatrixGForm) -> MatrixGForm:
    A = nabla.algebroid
    comps = koszul(A, omega.components, omega.degree, nabla.act,
                   Matrix.zeros(A.ctx, nabla.complex.rank))
    return MatrixGForm(A.ctx, omega.parities, omega.degree + 1, comps)


def supertrace(omega: MatrixGForm) -> GForm:
    comps = {}
    for k, m in omega.components.items():
        acc = omega.ctx.zero
        for i, p in enumerate(omega.parities):
            v = m[i, i]
            if v:
                acc = acc - v if p else acc + v
        comps[k] = acc
    return GForm(omega.ctx, omega.degree, comps)


@dataclass(frozen=True, eq=False)
class HomotopyEquivalence:
    """theta: a 1-form with odd endomorphism values (total degree even)."""

    theta: MatrixGForm

    def __post_init__(self):
        if self.theta.is_zero():
            return
        if self.theta.degree != 1:
            raise ValueError("theta must be a 1-form")
        if self.theta.endo_parity is not Parity.ODD:
            raise GradingError("theta must take odd (off-diagonal) values")

    def value(self, i: int) -> Matrix:
        return self.theta[(i,)]


def apply_equivalence(nabla: GConnection, theta: HomotopyEquivalence | MatrixGForm) -> GConnection:
    """omega'_i = omega_i + [theta(e_i), partial] = omega_i + theta_i P + P theta_i."""
    if isinstance(theta, MatrixGForm):
        theta = HomotopyEquivalence(theta)
    P = nabla.complex.partial
    if theta.theta.parities != nabla.parities:
        raise ValueError("theta acts on a differently graded bundle")
    omegas = []
    for i, w in enumerate(nabla.omegas):
        t = theta.value(i)
        omegas.append(w + t @ P + P @ t if not t.is_zero() else w)
    return GConnection(nabla.algebroid, nabla.complex, tuple(omegas))


def adjoint_partial(partial: Matrix, h: Metric) -> Matrix:
    return h.adjoint(partial)


def adjoint_connection(nabla: GConnection, h: Metric) -> GConnection:
    """nabla^h on (E, partial^h): omega^h_i = H^{-1} rho_i(H) - H^{-1} omega_i^H H."""
    if not h.complex.same_grading(nabla.complex):
        raise ValueError("metric and connection live on different bundles")
    A = nabla.algebroid
    Hinv = h.inverse
    omegas = tuple(Hinv @ A.rho_matrix(i, h.H) - h.adjoint(w) for i, w in enumerate(nabla.omegas))
    E_h = nabla.complex.with_partial(adjoint_partial(nabla.complex.partial, h))
    return GConnection(A, E_h, omegas)


def metric_connection(h: Metric, A: LieAlgebroid, E: SuperComplex | None = None) -> GConnection:
    """omega_i = 1/2 H^{-1} rho_i(H); equals its own h-adjoint."""
    E = h.complex if E is None else E
    Hinv = h.inverse
    half = A.ctx.const(1) / 2
    omegas = tuple((Hinv @ A.rho_matrix(i, h.H)) * half for i in range(A.rank))
    return GConnection(A, E, omegas)


def _odd_slots(parities) -> list[tuple[int, int]]:
    r = len(parities)
    return [(a, b) for a in range(r) for b in range(r) if parities[a] != parities[b]]


def solve_bracket_with_partial(target: MatrixGForm, partial: Matrix) -> MatrixGForm | None:
    """Endomorphism-odd eta with eta P + P eta = target componentwise, or None.

    One linear system over the fraction field, solved by fraction-free
    elimination; unknowns outside the pivot set are taken to be zero.
    """
    ctx, par = target.ctx, target.parities
    r = len(par)
    slots = _odd_slots(par)
    if target.is_zero():
        return MatrixGForm.zero(ctx, par, target.degree)
    keys = sorted(target.components)
    eqs = [(a, b) for a in range(r) for b in range(r) if par[a] == par[b]]
    for k in keys:
        if endo_parity(target.components[k], par) not in (Parity.EVEN,):
            return None
    if not slots:
        return None
    P = partial.entries
    z = ctx.zero
    # column for unknown E_ab: (E_ab P)[a][c] = P[b][c], (P E_ab)[c][b] = P[c][a]
    rows = []
    for (x, y) in eqs:
        row = []
        for (a, b) in slots:
            v = z
            if x == a:
                v = v + P[b][y]
            if y == b:
                v = v + P[x][a]
            row.append(v)
        rows.append(row)
    rhs = [[target.components[k][x, y] for k in keys] for (x, y) in eqs]
    lhs = Matrix(ctx, rows, len(slots))
    sol = lhs.solve(Matrix(ctx, rhs, len(keys)))
    if sol is None:
        return None
    comps = {}
    for col, k in enumerate(keys):
        grid = [[z] * r for _ in range(r)]
        for s, (a, b) in enumerate(slots):
            grid[a][b] = sol[s, col]
        comps[k] = Matrix(ctx, grid, r)
    return MatrixGForm(ctx, par, target.degree, comps)


def flat_up_to_homotopy(nabla: GConnection) -> MatrixGForm | None:
    """eta with curvature = [eta, partial], or None when no such eta exists."""
    return solve_bracket_with_partial(curvature(nabla), nabla.complex.partial)
