"""Brute-force reference computations, independent of the package internals.

Polynomials are plain dicts {exponent tuple: Fraction}.  Spans are built by
listing every product g * mu explicitly and running textbook Gaussian
elimination with the *highest* lexicographic monomial as pivot (the package
pivots on the lowest graded monomial), so the two share no code path.
"""
from __future__ import annotations

import itertools
from fractions import Fraction


def monomials(nvars: int, L: int, dmin: int = 0, variables=None):
    variables = range(nvars) if variables is None else list(variables)
    out = []
    for d in range(dmin, L + 1):
        for combo in itertools.combinations_with_replacement(variables, d):
            e = [0] * nvars
            for v in combo:
                e[v] += 1
            out.append(tuple(e))
    return out


def poly(jet) -> dict:
    """Copy a JetPoly's terms into a plain dict."""
    return {tuple(m): Fraction(c) for m, c in jet.items()}


def mul(a: dict, b: dict, L: int) -> dict:
    out: dict = {}
    for ma, ca in a.items():
        for mb, cb in b.items():
            m = tuple(x + y for x, y in zip(ma, mb))
            if sum(m) <= L:
                out[m] = out.get(m, 0) + ca * cb
    return {m: c for m, c in out.items() if c != 0}


def diff(a: dict, i: int) -> dict:
    out = {}
    for m, c in a.items():
        if m[i]:
            e = list(m)
            e[i] -= 1
            out[tuple(e)] = c * m[i]
    return out


def var(nvars: int, i: int) -> dict:
    e = [0] * nvars
    e[i] = 1
    return {tuple(e): Fraction(1)}


class Span:
    """Row-reduced span; pivot is the lexicographically largest monomial."""

    def __init__(self):
        self.rows: dict[tuple, dict] = {}

    def reduce(self, v: dict) -> dict:
        v = dict(v)
        while v:
            lead = max(v)
            if lead not in self.rows:
                return v
            row = self.rows[lead]
            f = v[lead] / row[lead]
            for m, c in row.items():
                nc = v.get(m, 0) - f * c
                if nc == 0:
                    v.pop(m, None)
                else:
                    v[m] = nc
        return v

    def add(self, v: dict) -> bool:
        r = self.reduce(v)
        if not r:
            return False
        self.rows[max(r)] = r
        return True

    def contains(self, v: dict) -> bool:
        return not self.reduce(v)

    @property
    def rank(self) -> int:
        return len(self.rows)


def module(span: Span, gens, nvars: int, L: int, dmin: int = 0, variables=None) -> Span:
    for g in gens:
        for mu in monomials(nvars, L, dmin, variables):
            p = mul(g, {mu: Fraction(1)}, L)
            if p:
                span.add(p)
    return span


def k_tangent(f: dict, r: int, k: int, L: int, shift: int = 0) -> Span:
    """M^shift <f, x df/dx> + M^(shift+1) <df/dy> in J^L, over r + k variables."""
    nv = r + k
    s = Span()
    head = [f] + [mul(var(nv, i), diff(f, i), L) for i in range(r)]
    module(s, head, nv, L, shift)
    module(s, [diff(f, r + j) for j in range(k)], nv, L, shift + 1)
    return s


def sufficient_determined(f: dict, r: int, k: int, l: int) -> bool:
    L = l + 1
    s = k_tangent(f, r, k, L, shift=1)
    return all(s.contains({m: Fraction(1)}) for m in monomials(r + k, L, L))


def determinacy_order(f: dict, r: int, k: int, l_max: int = 8):
    for l in range(1, l_max + 1):
        if sufficient_determined(f, r, k, l):
            return l
    return None


def k_codimension(f: dict, r: int, k: int, L: int) -> int:
    from math import comb
    return comb(L + r + k, r + k) - k_tangent(f, r, k, L).rank


def stable_span_full(F: dict, r: int, k: int, m: int, n: int, L: int) -> bool:
    """<F, x F_x, F_y>_E + <F_u>_{E(t,u)} + <F_t>_{E(t)} spans J^L."""
    from math import comb
    nv = r + k + m + n
    xs = range(r)
    ys = range(r, r + k)
    ts = range(r + k, r + k + m)
    us = range(r + k + m, nv)
    s = Span()
    head = [F] + [mul(var(nv, i), diff(F, i), L) for i in xs] + [diff(F, j) for j in ys]
    module(s, head, nv, L)
    module(s, [diff(F, u) for u in us], nv, L, 0, list(ts) + list(us))
    module(s, [diff(F, t) for t in ts], nv, L, 0, list(ts))
    return s.rank == comb(L + nv, nv)


def versal_span_full(F: dict, r: int, k: int, m: int, n: int, L: int) -> bool:
    """<f, x f_x, f_y>_E + <f_u>_{E(u)} + R<F_t|t=0> spans J^L in (x, y, u)."""
    from math import comb
    nv = r + k + m + n
    keep = [i for i in range(nv) if not (r + k <= i < r + k + m)]

    def drop_t(p):
        out = {}
        for mono, c in p.items():
            if any(mono[i] for i in range(r + k, r + k + m)):
                continue
            e = tuple(mono[i] for i in keep)
            out[e] = out.get(e, 0) + c
        return out

    f = drop_t(F)
    nb = r + k + n
    xs = range(r)
    ys = range(r, r + k)
    us = range(r + k, nb)
    s = Span()
    head = [f] + [mul(var(nb, i), diff(f, i), L) for i in xs] + [diff(f, j) for j in ys]
    module(s, head, nb, L)
    module(s, [diff(f, u) for u in us], nb, L, 0, list(us))
    for t in range(r + k, r + k + m):
        g = drop_t(diff(F, t))
        g = {mm: c for mm, c in g.items() if sum(mm) <= L}
        if g:
            s.add(g)
    return s.rank == comb(L + nb, nb)


def rank_1jets(funcs: list[dict], nvars: int) -> int:
    s = Span()
    for f in funcs:
        lin = {m: c for m, c in f.items() if sum(m) == 1}
        if lin:
            s.add(lin)
    return s.rank
