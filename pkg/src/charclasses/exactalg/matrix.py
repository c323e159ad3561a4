"""Dense immutable matrices of RatExpr."""

from __future__ import annotations

from typing import Callable, Iterable

from . import linsolve
from .ratexpr import Context, RatExpr


class SingularMatrixError(ArithmeticError):
    pass


class Matrix:
    __slots__ = ("ctx", "rows", "cols", "entries", "_hash")

    def __init__(self, ctx: Context, entries: Iterable[Iterable], cols: int | None = None):
        grid = tuple(tuple(ctx.const(e) if not isinstance(e, RatExpr) else e for e in row)
                     for row in entries)
        if grid:
            cols = len(grid[0])
            if any(len(row) != cols for row in grid):
                raise ValueError("ragged matrix")
        elif cols is None:
            cols = 0
        for row in grid:
            for e in row:
                if e.ctx != ctx:
                    raise ValueError("matrix entry from a different context")
        self.ctx = ctx
        self.rows = len(grid)
        self.cols = cols
        self.entries = grid
        self._hash = None

    # constructors
    @classmethod
    def zeros(cls, ctx: Context, rows: int, cols: int | None = None) -> Matrix:
        cols = rows if cols is None else cols
        z = ctx.zero
        return cls(ctx, [[z] * cols for _ in range(rows)], cols)

    @classmethod
    def identity(cls, ctx: Context, n: int) -> Matrix:
        z, o = ctx.zero, ctx.one
        return cls(ctx, [[o if i == j else z for j in range(n)] for i in range(n)], n)

    @classmethod
    def from_sparse(cls, ctx: Context, rows: int, cols: int, entries) -> Matrix:
        """Build from ``(row, col, value)`` triples with 0-based indices."""
        grid = [[ctx.zero] * cols for _ in range(rows)]
        for i, j, v in entries:
            if not (0 <= i < rows and 0 <= j < cols):
                raise IndexError(f"entry ({i}, {j}) outside a {rows}x{cols} matrix")
            grid[i][j] = grid[i][j] + (ctx.parse(v) if isinstance(v, str) else ctx.const(v))
        return cls(ctx, grid, cols)

    @classmethod
    def parse(cls, ctx: Context, rows) -> Matrix:
        return cls(ctx, [[ctx.parse(e) if isinstance(e, str) else e for e in row] for row in rows])

    @classmethod
    def block_diag(cls, ctx: Context, *blocks: Matrix) -> Matrix:
        n = sum(b.rows for b in blocks)
        m = sum(b.cols for b in blocks)
        grid = [[ctx.zero] * m for _ in range(n)]
        r = c = 0
        for b in blocks:
            for i in range(b.rows):
                for j in range(b.cols):
                    grid[r + i][c + j] = b.entries[i][j]
            r += b.rows
            c += b.cols
        return cls(ctx, grid, m)

    # access
    def __getitem__(self, ij) -> RatExpr:
        i, j = ij
        return self.entries[i][j]

    @property
    def shape(self) -> tuple[int, int]:
        return self.rows, self.cols

    def is_square(self) -> bool:
        return self.rows == self.cols

    def is_zero(self) -> bool:
        return not any(e for row in self.entries for e in row)

    def __bool__(self):
        return not self.is_zero()

    def block(self, r0: int, r1: int, c0: int, c1: int) -> Matrix:
        return Matrix(self.ctx, [row[c0:c1] for row in self.entries[r0:r1]], c1 - c0)

    def to_lists(self) -> list[list[RatExpr]]:
        return [list(row) for row in self.entries]

    def __eq__(self, other):
        if not isinstance(other, Matrix):
            return NotImplemented
        return self.shape == other.shape and self.entries == other.entries

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self.entries)
        return self._hash

    # arithmetic
    def _check_shape(self, other: Matrix):
        if self.shape != other.shape:
            raise ValueError(f"shape mismatch {self.shape} vs {other.shape}")

    def __add__(self, other: Matrix) -> Matrix:
        if not isinstance(other, Matrix):
            return NotImplemented
        self._check_shape(other)
        return Matrix(self.ctx, [[a + b for a, b in zip(r, s)]
                                 for r, s in zip(self.entries, other.entries)], self.cols)

    def __sub__(self, other: Matrix) -> Matrix:
        if not isinstance(other, Matrix):
            return NotImplemented
        self._check_shape(other)
        return Matrix(self.ctx, [[a - b for a, b in zip(r, s)]
                                 for r, s in zip(self.entries, other.entries)], self.cols)

    def __neg__(self) -> Matrix:
        return Matrix(self.ctx, [[-a for a in r] for r in self.entries], self.cols)

    def __mul__(self, scalar) -> Matrix:
        if isinstance(scalar, Matrix):
            return NotImplemented
        s = self.ctx.const(scalar)
        if not s:
            return Matrix.zeros(self.ctx, self.rows, self.cols)
        if s == 1:
            return self
        return Matrix(self.ctx, [[s * a for a in r] for r in self.entries], self.cols)

    __rmul__ = __mul__

    def __matmul__(self, other: Matrix) -> Matrix:
        if not isinstance(other, Matrix):
            return NotImplemented
        if self.cols != other.rows:
            raise ValueError(f"cannot multiply {self.shape} by {other.shape}")
        z = self.ctx.zero
        cols_b = list(zip(*other.entries)) if other.rows else [()] * other.cols
        out = []
        for row in self.entries:
            nz = [(k, a) for k, a in enumerate(row) if a]
            new_row = []
            for col in cols_b:
                acc = z
                for k, a in nz:
                    b = col[k]
                    if b:
                        acc = acc + a * b
                new_row.append(acc)
            out.append(new_row)
        return Matrix(self.ctx, out, other.cols)

    def map(self, fn: Callable[[RatExpr], RatExpr]) -> Matrix:
        return Matrix(self.ctx, [[fn(a) for a in r] for r in self.entries], self.cols)

    def diff(self, var: str) -> Matrix:
        return self.map(lambda a: a.diff(var))

    @property
    def T(self) -> Matrix:
        return Matrix(self.ctx, [list(c) for c in zip(*self.entries)] if self.rows else [],
                      self.rows)

    @property
    def H(self) -> Matrix:
        """Conjugate transpose."""
        return self.T.map(lambda a: a.conjugate())

    def conjugate(self) -> Matrix:
        return self.map(lambda a: a.conjugate())

    def convert(self, ctx: Context) -> Matrix:
        if ctx == self.ctx:
            return self
        return Matrix(ctx, [[a.convert(ctx) for a in r] for r in self.entries], self.cols)

    def trace(self) -> RatExpr:
        acc = self.ctx.zero
        for i in range(min(self.rows, self.cols)):
            acc = acc + self.entries[i][i]
        return acc

    # linear algebra over the fraction field
    def det(self) -> RatExpr:
        if not self.is_square():
            raise ValueError("determinant of a non-square matrix")
        if self.rows == 0:
            return self.ctx.one
        return linsolve.determinant(self.to_lists())

    def rank(self) -> int:
        return linsolve.rank(self.to_lists()) if self.rows and self.cols else 0

    def solve(self, rhs: Matrix) -> Matrix | None:
        """A solution X of ``self @ X = rhs`` (free unknowns zero) or None."""
        if rhs.rows != self.rows:
            raise ValueError("row count mismatch")
        if self.cols == 0:
            return Matrix.zeros(self.ctx, 0, rhs.cols) if rhs.is_zero() else None
        x = linsolve.solve(self.to_lists(), rhs.to_lists(), self.ctx.zero)
        return None if x is None else Matrix(self.ctx, x, rhs.cols)

    def inverse(self) -> Matrix:
        if not self.is_square():
            raise ValueError("inverse of a non-square matrix")
        n = self.rows
        if n == 0:
            return self
        # A X = I is consistent exactly when A is invertible
        x = linsolve.solve(self.to_lists(), Matrix.identity(self.ctx, n).to_lists(), self.ctx.zero)
        if x is None:
            raise SingularMatrixError("matrix is singular over the fraction field")
        return Matrix(self.ctx, x, n)

    def __str__(self):
        return "[" + ", ".join("[" + ", ".join(str(a) for a in r) + "]" for r in self.entries) + "]"

    def __repr__(self):
        return f"Matrix({self})"
