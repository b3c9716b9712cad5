"""Reticular K tangent spaces, finite determinacy and codimension."""
from __future__ import annotations

import enum
from dataclasses import dataclass

from .jetalg import (
    JetPoly,
    ModulePart,
    Monomial,
    SubspaceBasis,
    all_monomials,
    cobasis_from_pivots,
    pivot_monomials,
    span_pivots,
    sum_of_modules,
)

DEFAULT_L_MAX = 12


class Determinacy(enum.Enum):
    DETERMINED = "determined_at_most"
    NECESSARY_FAILED = "necessary_failed"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class DeterminacyVerdict:
    """Outcome of the two-sided determinacy test at one order.

    ``DETERMINED`` means the sufficient inclusion holds at ``order_tested``;
    ``NECESSARY_FAILED`` means the converse inclusion fails there, so the germ
    is provably not determined at that order; ``UNKNOWN`` is the gap between
    the two.  ``missing`` lists degree-(l+1) monomials outside the tested
    module.
    """

    order_tested: int
    status: Determinacy
    missing: tuple[Monomial, ...] = ()

    @property
    def determined(self) -> bool:
        return self.status is Determinacy.DETERMINED

    @property
    def order(self) -> int | None:
        return self.order_tested if self.determined else None

    def to_json(self) -> dict:
        return {"status": self.status.value, "order": self.order_tested}


@dataclass(frozen=True)
class KCodimension:
    dim: int
    cobasis: tuple[Monomial, ...]
    stabilized: bool
    truncation: int

    def __iter__(self):
        return iter((self.dim, self.cobasis, self.stabilized))

    def hilbert(self) -> tuple[int, ...]:
        """Cobasis counts by degree: dim((M^i + T)/(M^(i+1) + T)), i = 0..L."""
        counts = [0] * (self.truncation + 1)
        for m in self.cobasis:
            counts[m.degree] += 1
        return tuple(counts)


def _check_base_germ(f0: JetPoly, allow_zero: bool = True) -> None:
    ctx = f0.context
    if ctx.m or ctx.n:
        raise ValueError("base germ must live in E(r;k): no t or u variables")
    if f0.constant_term != 0:
        raise ValueError("germ has a nonzero constant term (a unit); it is not in the maximal ideal")
    if not allow_zero and f0.is_zero():
        raise ValueError("the zero germ is not finitely determined")


def _x_derivative_terms(f: JetPoly, L: int) -> list[JetPoly]:
    """x_i * df/dx_i for each corner variable, truncated at L."""
    ctx = f.context
    out = []
    for i in ctx.role_indices("x"):
        xi = JetPoly.variable(ctx, f.truncation, i)
        out.append((xi * f.partial(i)).with_truncation(L))
    return out


def _widen(f: JetPoly, L: int) -> JetPoly:
    # derivatives at truncation L need the jet to order L + 1
    return f.with_truncation(L + 1)


def _k_parts(f0: JetPoly, L: int, shift: int) -> list[ModulePart]:
    """Parts of M^shift * (<f0, x df0/dx> + M <df0/dy>) at truncation L."""
    f = _widen(f0, L)
    ctx = f.context
    head = [f.with_truncation(L)] + _x_derivative_terms(f, L)
    dy = [f.partial(j).with_truncation(L) for j in ctx.role_indices("y")]
    return [ModulePart(tuple(head), None, shift), ModulePart(tuple(dy), None, shift + 1)]


def reticular_K_tangent(f0: JetPoly, L: int) -> SubspaceBasis:
    """<f0, x_i df0/dx_i>_E + M <df0/dy_j>, truncated at L."""
    _check_base_germ(f0)
    return sum_of_modules(_k_parts(f0, L, 0), f0.context, L)


def _top_degree_missing(parts, f0: JetPoly, L: int) -> tuple[Monomial, ...]:
    piv = pivot_monomials(f0.context, L, span_pivots(parts, f0.context, L))
    return tuple(m for m in all_monomials(f0.context, L, degree=L) if m not in piv)


def is_K_l_determined(f0: JetPoly, l: int) -> DeterminacyVerdict:
    """Sufficient and necessary determinacy inclusions tested in J^(l+1).

    In J^(l+1) the degree-(l+1) monomials span M^(l+1) and M^(l+2) vanishes,
    and a top-degree monomial lies in a subspace exactly when it is one of its
    pivots.
    """
    if l < 0:
        raise ValueError("order l must be >= 0")
    _check_base_germ(f0)
    L = l + 1
    missing = _top_degree_missing(_k_parts(f0, L, 1), f0, L)
    if not missing:
        return DeterminacyVerdict(l, Determinacy.DETERMINED)
    # a failure of the converse inclusion after projection is a failure in E
    necessary_missing = _top_degree_missing(_k_parts(f0, L, 0), f0, L)
    if necessary_missing:
        return DeterminacyVerdict(l, Determinacy.NECESSARY_FAILED, necessary_missing)
    return DeterminacyVerdict(l, Determinacy.UNKNOWN, missing)


def determinacy_order(f0: JetPoly, l_max: int = DEFAULT_L_MAX) -> DeterminacyVerdict:
    """Smallest l with a DETERMINED verdict, else UNKNOWN at l_max."""
    _check_base_germ(f0, allow_zero=False)
    for l in range(1, l_max + 1):
        verdict = is_K_l_determined(f0, l)
        if verdict.determined:
            return verdict
    return DeterminacyVerdict(l_max, Determinacy.UNKNOWN)


def reticular_PK_orbit_tangent(f: JetPoly, L: int) -> SubspaceBasis:
    """<f, x df/dx>_E + M <df/dy> + M(n) <df/du>, truncated at L."""
    ctx = f.context
    if ctx.m:
        raise ValueError("orbit tangent is defined for germs without t variables")
    parts = _k_parts(f, L, 0)
    g = _widen(f, L)
    du = tuple(g.partial(i).with_truncation(L) for i in ctx.role_indices("u"))
    parts.append(ModulePart(du, tuple(ctx.role_indices("u")), 1))
    return sum_of_modules(parts, ctx, L)


def K_codimension(f0: JetPoly, L: int | None = None, l_max: int = DEFAULT_L_MAX) -> KCodimension:
    """Dimension of J^L modulo the reticular K tangent space.

    ``stabilized`` is a heuristic flag: no cobasis monomial of degree >= L-1.
    Without an explicit L the order is two above the determinacy order (or
    ``l_max`` when none is found).
    """
    _check_base_germ(f0)
    if L is None:
        if f0.is_zero():
            L = l_max
        else:
            verdict = determinacy_order(f0, l_max)
            L = verdict.order_tested + 2 if verdict.determined else l_max
    piv = span_pivots(_k_parts(f0, L, 0), f0.context, L)
    cob = cobasis_from_pivots(f0.context, L, piv)
    stabilized = all(m.degree < L - 1 for m in cob)
    return KCodimension(len(cob), cob, stabilized, L)
