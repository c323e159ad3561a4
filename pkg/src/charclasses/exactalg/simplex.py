"""Exact integration of polynomials over the standard simplex."""

from __future__ import annotations

import re
from fractions import Fraction
from math import factorial

from sympy.polys.domains import QQ

from .ratexpr import RatExpr, _normalize

_TVAR = re.compile(r"t([1-9][0-9]*)\Z")


def simplex_var(a: int) -> str:
    """Name of the a-th simplex parameter (1-based)."""
    return f"t{a}"


def simplex_integrate(p: RatExpr, k: int) -> RatExpr:
    """Integral of ``p`` over {t_a >= 0, sum t_a <= 1} with respect to dt_1...dt_k.

    Uses  int t^a = prod(a_i!) / (k + sum a_i)!  monomial by monomial; chart
    variables and parameters ride along as coefficients.
    """
    if k < 0:
        raise ValueError("simplex dimension must be non-negative")
    ctx = p.ctx
    tpos = {}
    for idx, name in enumerate(ctx.variables):
        m = _TVAR.match(name)
        if m:
            tpos[idx] = int(m.group(1))
    used = p.free_variables()
    for idx, a in tpos.items():
        name = ctx.variables[idx]
        if a > k and name in used:
            raise ValueError(f"integrand involves {name} but the simplex has dimension {k}")
    for monom in p.den.itermonoms():
        if any(monom[idx] for idx in tpos):
            raise ValueError("denominator depends on a simplex parameter")
    active = [idx for idx, a in tpos.items() if a <= k]

    def integrate(poly):
        out = {}
        for monom, c in poly.items():
            exps = [monom[idx] for idx in active]
            weight = Fraction(1, factorial(k + sum(exps)))
            for e in exps:
                weight *= factorial(e)
            new = list(monom)
            for idx in active:
                new[idx] = 0
            new = tuple(new)
            out[new] = out.get(new, QQ.zero) + c * QQ(weight.numerator, weight.denominator)
        return ctx.ring({m: c for m, c in out.items() if c})

    return _normalize(ctx, integrate(p.re), integrate(p.im), p.den)
