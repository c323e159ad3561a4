"""Fraction-free (Bareiss) elimination over any exact field.

Works on plain lists of rows whose entries support ``+ - * /`` and truth
testing, so it serves both ``Fraction`` systems and ``RatExpr`` systems.
"""

from __future__ import annotations


def _cost(x) -> int:
    degree = getattr(x, "degree", None)
    if degree is None:
        return 0
    den = getattr(x, "den", None)
    return degree() + (0 if den is None or den == 1 else 1 + len(den))


def echelon(rows: list[list], ncols: int | None = None):
    """Bareiss forward elimination on the leading ``ncols`` columns.

    Returns ``(rows, pivots, sign)``: the eliminated rows (a new list), the
    pivot column indices, and the permutation sign from row swaps.
    """
    m = [list(r) for r in rows]
    if not m:
        return m, [], 1
    width = len(m[0])
    ncols = width if ncols is None else ncols
    prev = None
    pivots: list[int] = []
    sign = 1
    r = 0
    for c in range(ncols):
        if r == len(m):
            break
        candidates = [k for k in range(r, len(m)) if m[k][c]]
        if not candidates:
            continue
        p = min(candidates, key=lambda k: _cost(m[k][c]))
        if p != r:
            m[r], m[p] = m[p], m[r]
            sign = -sign
        piv = m[r][c]
        zero = piv - piv
        for i in range(r + 1, len(m)):
            lead = m[i][c]
            row_i, row_r = m[i], m[r]
            for j in range(c + 1, width):
                v = piv * row_i[j]
                if lead:
                    v = v - lead * row_r[j]
                row_i[j] = v if prev is None else v / prev
            row_i[c] = zero
        prev = piv
        pivots.append(c)
        r += 1
    return m, pivots, sign


def rank(rows: list[list]) -> int:
    return len(echelon(rows)[1])


def determinant(rows: list[list]):
    n = len(rows)
    if any(len(r) != n for r in rows):
        raise ValueError("determinant of a non-square matrix")
    m, pivots, sign = echelon(rows)
    if len(pivots) < n:
        return rows[0][0] - rows[0][0]
    # with Bareiss the last pivot is the determinant
    return m[n - 1][n - 1] if sign == 1 else -m[n - 1][n - 1]


def solve(a: list[list], b: list[list], zero):
    """One solution X of ``a X = b`` or ``None`` if inconsistent.

    Free (non-pivot) unknowns are set to zero, which makes the answer
    deterministic.
    """
    nrows = len(a)
    if nrows != len(b):
        raise ValueError("row count mismatch")
    nvars = len(a[0]) if a else 0
    nrhs = len(b[0]) if b else 0
    aug = [list(a[i]) + list(b[i]) for i in range(nrows)]
    m, pivots, _ = echelon(aug, nvars)
    rk = len(pivots)
    for i in range(rk, nrows):
        if any(m[i][nvars + j] for j in range(nrhs)):
            return None
    x = [[zero] * nrhs for _ in range(nvars)]
    for k in reversed(range(rk)):
        c = pivots[k]
        piv = m[k][c]
        for j in range(nrhs):
            acc = m[k][nvars + j]
            for kk in range(k + 1, rk):
                cc = pivots[kk]
                if m[k][cc] and x[cc][j]:
                    acc = acc - m[k][cc] * x[cc][j]
            x[c][j] = acc / piv
    return x


def nullspace(a: list[list], zero, one) -> list[list]:
    """Basis of the right kernel, one vector per free column."""
    if not a:
        return []
    nvars = len(a[0])
    m, pivots, _ = echelon(a)
    free = [c for c in range(nvars) if c not in pivots]
    basis = []
    for f in free:
        x = [zero] * nvars
        x[f] = one
        for k in reversed(range(len(pivots))):
            c = pivots[k]
            acc = zero
            for j in range(c + 1, nvars):
                if m[k][j] and x[j]:
                    acc = acc - m[k][j] * x[j]
            x[c] = acc / m[k][c]
        basis.append(x)
    return basis
