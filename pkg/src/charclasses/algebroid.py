"""Lie algebroids on a single chart and their scalar form complex C*(g)."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
from typing import Callable, Mapping

from .exactalg import Context, Matrix, RatExpr


class InvalidAlgebroidError(ValueError):
    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("algebroid fails validation: " + "; ".join(self.violations))


@dataclass(frozen=True)
class Chart:
    coords: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "coords", tuple(self.coords))
        if len(set(self.coords)) != len(self.coords):
            raise ValueError(f"duplicate coordinate names {self.coords}")

    @property
    def dim_m(self) -> int:
        return len(self.coords)


@dataclass(frozen=True, eq=False)
class LieAlgebroid:
    """Algebroid of rank n over a chart with frame e_1..e_n.

    ``anchor`` is n x m: row i holds the coordinate components of rho(e_i).
    ``structure[i][j][k]`` is c_ij^k in [e_i, e_j] = sum_k c_ij^k e_k.
    """

    ctx: Context
    chart: Chart
    rank: int
    anchor: Matrix
    structure: tuple
    trusted: bool = field(default=False, repr=False)

    def __post_init__(self):
        n, m = self.rank, self.chart.dim_m
        missing = [c for c in self.chart.coords if c not in self.ctx.variables]
        if missing:
            raise ValueError(f"chart coordinates {missing} not declared in the context")
        if self.anchor.shape != (n, m):
            raise ValueError(f"anchor must be {n}x{m}, got {self.anchor.shape}")
        c = self.structure
        if len(c) != n or any(len(ci) != n or any(len(cij) != n for cij in ci) for ci in c):
            raise ValueError(f"structure functions must form an {n}x{n}x{n} array")
        object.__setattr__(self, "structure", tuple(tuple(tuple(cij) for cij in ci) for ci in c))

    @classmethod
    def build(cls, ctx: Context, coords, anchor_rows, structure=()) -> LieAlgebroid:
        """Construct from row-major anchor expressions and sparse ``(i, j, k, c)``
        structure entries (1-based, i < j; the (j, i) entry follows by antisymmetry)."""
        chart = Chart(tuple(coords))
        anchor = Matrix.parse(ctx, anchor_rows) if anchor_rows else None
        n = anchor.rows if anchor is not None else 0
        return cls.from_triples(ctx, chart, n, anchor, structure)

    @classmethod
    def from_triples(cls, ctx, chart, n, anchor, triples) -> LieAlgebroid:
        if anchor is None or (anchor.rows == 0 and n):
            anchor = Matrix.zeros(ctx, n, chart.dim_m)
        grid = [[[ctx.zero] * n for _ in range(n)] for _ in range(n)]
        for i, j, k, val in triples:
            if not i < j:
                raise ValueError(f"structure entry ({i}, {j}) must have i < j")
            if not all(1 <= v <= n for v in (i, j, k)):
                raise IndexError(f"structure index out of range in ({i}, {j}, {k})")
            v = ctx.parse(val) if isinstance(val, str) else ctx.const(val)
            grid[i - 1][j - 1][k - 1] = grid[i - 1][j - 1][k - 1] + v
            grid[j - 1][i - 1][k - 1] = grid[j - 1][i - 1][k - 1] - v
        return cls(ctx, chart, n, anchor, grid)

    # structure access
    @cached_property
    def _sparse(self) -> tuple:
        return tuple(tuple(tuple((k, v) for k, v in enumerate(cij) if v) for cij in ci)
                     for ci in self.structure)

    def bracket_terms(self, i: int, j: int):
        """Nonzero (k, c_ij^k) pairs."""
        return self._sparse[i][j]

    @cached_property
    def _anchor_terms(self) -> tuple:
        return tuple(tuple((self.chart.coords[a], v) for a, v in enumerate(row) if v)
                     for row in self.anchor.entries)

    def rho(self, i: int, f: RatExpr) -> RatExpr:
        """rho(e_i) acting on a function."""
        acc = self.ctx.zero
        if not f:
            return acc
        for coord, v in self._anchor_terms[i]:
            df = f.diff(coord)
            if df:
                acc = acc + v * df
        return acc

    def rho_matrix(self, i: int, m: Matrix) -> Matrix:
        if not self._anchor_terms[i]:
            return Matrix.zeros(self.ctx, m.rows, m.cols)
        return m.map(lambda f: self.rho(i, f))

    # validation gate
    @cached_property
    def violations(self) -> tuple[str, ...]:
        return tuple(validate_algebroid(self))

    def require_valid(self) -> None:
        if not self.trusted and self.violations:
            raise InvalidAlgebroidError(self.violations)

    @property
    def is_point(self) -> bool:
        return self.chart.dim_m == 0

    def basis_section(self, i: int) -> Section:
        return Section(tuple(self.ctx.one if k == i else self.ctx.zero for k in range(self.rank)))


@dataclass(frozen=True)
class Section:
    coeffs: tuple[RatExpr, ...]

    def __add__(self, other: Section) -> Section:
        return Section(tuple(a + b for a, b in zip(self.coeffs, other.coeffs, strict=True)))

    def __sub__(self, other: Section) -> Section:
        return Section(tuple(a - b for a, b in zip(self.coeffs, other.coeffs, strict=True)))

    def scale(self, f: RatExpr) -> Section:
        return Section(tuple(f * a for a in self.coeffs))

    def is_zero(self) -> bool:
        return not any(self.coeffs)


def bracket(A: LieAlgebroid, s1: Section, s2: Section) -> Section:
    """[sum f_i e_i, sum g_j e_j] via structure functions and the anchor."""
    n = A.rank
    if len(s1.coeffs) != n or len(s2.coeffs) != n:
        raise ValueError("section length does not match the algebroid rank")
    f, g = s1.coeffs, s2.coeffs
    out = [A.ctx.zero] * n
    for i in range(n):
        if not f[i]:
            continue
        for j in range(n):
            if g[j]:
                fg = f[i] * g[j]
                for k, c in A.bracket_terms(i, j):
                    out[k] = out[k] + fg * c
    for k in range(n):
        for i in range(n):
            if f[i] and g[k]:
                out[k] = out[k] + f[i] * A.rho(i, g[k])
            if g[i] and f[k]:
                out[k] = out[k] - g[i] * A.rho(i, f[k])
    return Section(tuple(out))


def validate_algebroid(A: LieAlgebroid) -> list[str]:
    """Every violated axiom; empty means valid."""
    n, coords = A.rank, A.chart.coords
    c = A.structure
    report = []
    for i in range(n):
        for j in range(i, n):
            for k in range(n):
                if c[i][j][k] + c[j][i][k]:
                    report.append(f"antisymmetry: c[{i+1}][{j+1}][{k+1}] + c[{j+1}][{i+1}][{k+1}] != 0")
    if report:
        return report
    for i, j in combinations(range(n), 2):
        for a, xa in enumerate(coords):
            lhs = A.ctx.zero
            for k, v in A.bracket_terms(i, j):
                lhs = lhs + v * A.anchor[k, a]
            rhs = A.rho(i, A.anchor[j, a]) - A.rho(j, A.anchor[i, a])
            if lhs != rhs:
                report.append(f"anchor: rho([e{i+1}, e{j+1}]) != [rho(e{i+1}), rho(e{j+1})] "
                              f"in the {xa} component")
    e = [A.basis_section(i) for i in range(n)]
    for i, j, l in combinations(range(n), 3):
        jac = (bracket(A, bracket(A, e[i], e[j]), e[l])
               + bracket(A, bracket(A, e[j], e[l]), e[i])
               + bracket(A, bracket(A, e[l], e[i]), e[j]))
        if not jac.is_zero():
            report.append(f"Jacobi fails on (e{i+1}, e{j+1}, e{l+1})")
    return report


def _key_ok(key, degree) -> bool:
    return len(key) == degree and all(a < b for a, b in zip(key, key[1:]))


@dataclass(frozen=True, eq=False)
class GForm:
    """Scalar algebroid form: coefficients on increasing index tuples (0-based)."""

    ctx: Context
    degree: int
    components: Mapping[tuple[int, ...], RatExpr] = field(default_factory=dict)

    def __post_init__(self):
        comps = {}
        for key, v in self.components.items():
            key = tuple(key)
            if not _key_ok(key, self.degree):
                raise ValueError(f"bad index tuple {key} for a {self.degree}-form")
            if v:
                comps[key] = v
        object.__setattr__(self, "components", comps)

    @classmethod
    def zero(cls, ctx: Context, degree: int) -> GForm:
        return cls(ctx, degree, {})

    @classmethod
    def function(cls, f: RatExpr) -> GForm:
        return cls(f.ctx, 0, {(): f})

    @classmethod
    def basis(cls, ctx: Context, key) -> GForm:
        return cls(ctx, len(key), {tuple(key): ctx.one})

    def __getitem__(self, key) -> RatExpr:
        return self.components.get(tuple(key), self.ctx.zero)

    def items(self):
        return sorted(self.components.items())

    def is_zero(self) -> bool:
        return not self.components

    def __bool__(self):
        return bool(self.components)

    def __eq__(self, other):
        if not isinstance(other, GForm):
            return NotImplemented
        if not self.components and not other.components:
            return True
        return self.degree == other.degree and self.components == other.components

    def _combine(self, other: GForm, sign: int) -> GForm:
        if self.degree != other.degree and self.components and other.components:
            raise ValueError(f"adding a {self.degree}-form to a {other.degree}-form")
        degree = self.degree if self.components else other.degree
        comps = dict(self.components)
        for k, v in other.components.items():
            v = v if sign > 0 else -v
            comps[k] = comps[k] + v if k in comps else v
        return GForm(self.ctx, degree, comps)

    def __add__(self, other: GForm) -> GForm:
        return self._combine(other, 1)

    def __sub__(self, other: GForm) -> GForm:
        return self._combine(other, -1)

    def __neg__(self) -> GForm:
        return GForm(self.ctx, self.degree, {k: -v for k, v in self.components.items()})

    def scale(self, f) -> GForm:
        f = self.ctx.const(f)
        return GForm(self.ctx, self.degree, {k: f * v for k, v in self.components.items()})

    __rmul__ = scale

    def map(self, fn: Callable[[RatExpr], RatExpr]) -> GForm:
        return GForm(self.ctx, self.degree, {k: fn(v) for k, v in self.components.items()})

    def conjugate(self) -> GForm:
        return self.map(lambda v: v.conjugate())

    def convert(self, ctx: Context) -> GForm:
        return GForm(ctx, self.degree, {k: v.convert(ctx) for k, v in self.components.items()})

    def is_real(self) -> bool:
        return all(v.is_real() for v in self.components.values())

    def max_coefficient_degree(self) -> int:
        return max((v.degree() for v in self.components.values()), default=0)

    def __str__(self):
        if not self.components:
            return "0"
        parts = []
        for key, v in self.items():
            basis = "^".join(f"e{i+1}" for i in key) or "1"
            parts.append(f"({v})*{basis}")
        return " + ".join(parts)

    def __repr__(self):
        return f"GForm(degree={self.degree}, {self})"


def shuffle_sign(left: tuple[int, ...], right: tuple[int, ...]) -> int:
    """Sign taking (left, right) to sorted order; 0 if they overlap."""
    inversions = 0
    rset = set(right)
    for a in left:
        if a in rset:
            return 0
        inversions += sum(1 for b in right if b < a)
    return -1 if inversions & 1 else 1


def koszul(A: LieAlgebroid, components: Mapping, degree: int,
           act: Callable[[int, object], object], zero) -> dict:
    """The Lie-type differential on basis tuples.

    (dw)(e_I) = sum_a (-1)^a act(i_a, w(I minus i_a))
              + sum_{a<b} (-1)^{a+b} w([e_{i_a}, e_{i_b}], I minus {i_a, i_b}),
    with brackets expanded through structure functions.  ``act`` is the
    derivative action on coefficients (the anchor for scalars, the induced
    connection for End(E)-valued forms).
    """
    out = {}
    for key in combinations(range(A.rank), degree + 1):
        acc = zero
        touched = False
        for a, i in enumerate(key):
            v = components.get(key[:a] + key[a + 1:])
            if v is not None:
                term = act(i, v)
                acc = acc - term if a & 1 else acc + term
                touched = True
        for a, b in combinations(range(len(key)), 2):
            i, j = key[a], key[b]
            terms = A.bracket_terms(i, j)
            if not terms:
                continue
            rest = key[:a] + key[a + 1:b] + key[b + 1:]
            for c, coef in terms:
                if c in rest:
                    continue
                target = tuple(sorted(rest + (c,)))
                v = components.get(target)
                if v is None:
                    continue
                pos = sum(1 for r in rest if r < c)
                negative = (a + b + pos) & 1
                term = coef * v
                acc = acc - term if negative else acc + term
                touched = True
        if touched and acc:
            out[key] = acc
    return out


def d_algebroid(A: LieAlgebroid, w: GForm) -> GForm:
    comps = koszul(A, w.components, w.degree, A.rho, A.ctx.zero)
    return GForm(A.ctx, w.degree + 1, comps)


def wedge(w: GForm, eta: GForm) -> GForm:
    out: dict = {}
    for I, a in w.components.items():
        for J, b in eta.components.items():
            s = shuffle_sign(I, J)
            if not s:
                continue
            K = tuple(sorted(I + J))
            term = a * b if s > 0 else -(a * b)
            out[K] = out[K] + term if K in out else term
    return GForm(w.ctx, w.degree + eta.degree, out)
