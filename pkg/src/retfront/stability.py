"""Infinitesimal versality/stability of unfoldings and non-degeneracy tests.

Unfoldings F(x, y, t, u) are jets over a context with all four roles.  For
generating families the parameter slot holds ``(q_1, ..., q_n, z)``; z is an
ordinary parameter in every membership test.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .equivalence import DeterminacyVerdict, determinacy_order
from .jetalg import (
    JetPoly,
    ModulePart,
    Monomial,
    RingContext,
    cobasis_from_pivots,
    rank_of,
    span_pivots,
)


class NotFinitelyDetermined(ValueError):
    pass


def transversal_order(l: int, m: int) -> int:
    """Jet order l*m + l + m + 1 at which transversality decides stability."""
    if l < 0:
        raise ValueError("l must be >= 0")
    if m < 1:
        raise ValueError("m must be >= 1")
    return l * m + l + m + 1


def family_context(r: int, k: int, n: int, with_t: bool = True) -> RingContext:
    """Context (x, y, t, q_1..q_n, z) used for generating families."""
    return RingContext(r=r, k=k, m=1 if with_t else 0, n=n + 1,
                       u_names=tuple(f"q{i + 1}" for i in range(n)) + ("z",))


@dataclass(frozen=True)
class UnfoldingSpec:
    """An unfolding F(x, y, t, u) of its restriction f = F|_{t=0}."""

    F: JetPoly

    def __post_init__(self):
        if self.F.constant_term != 0:
            raise ValueError("unfolding must vanish at the origin")

    @property
    def context(self) -> RingContext:
        return self.F.context

    @property
    def base_context(self) -> RingContext:
        c = self.context
        return RingContext(r=c.r, k=c.k, m=0, n=c.n, u_names=c.u_names)

    @property
    def f(self) -> JetPoly:
        """F restricted to t = 0, in the context without t."""
        return self.F.transfer(self.base_context)

    @property
    def f0(self) -> JetPoly:
        """The (x, y) germ F|_{t=0, u=0}."""
        c = self.context
        return self.F.transfer(RingContext(r=c.r, k=c.k))


@dataclass
class StabilityReport:
    versal: bool | None
    stable: bool | None
    truncation_used: int
    residue_cobasis: tuple[Monomial, ...]
    determinacy_of_base: DeterminacyVerdict | None
    label: str | None = None
    context: RingContext | None = field(default=None, repr=False)

    def to_json(self) -> dict:
        ctx = self.context
        render = (lambda m: m.render(ctx)) if ctx is not None else (lambda m: list(m))
        return {
            "label": self.label,
            "versal": self.versal,
            "stable": self.stable,
            "truncation": self.truncation_used,
            "cobasis": [render(m) for m in self.residue_cobasis],
            "base_determinacy": (self.determinacy_of_base.to_json()
                                 if self.determinacy_of_base is not None else None),
        }


def _default_truncation(spec: UnfoldingSpec, L: int | None):
    """Caller truncation, else transversal_order(determinacy of f0, m)."""
    f0 = spec.f0
    verdict = determinacy_order(f0) if not f0.is_zero() else None
    if L is not None:
        return L, verdict
    if verdict is None or not verdict.determined:
        raise NotFinitelyDetermined(
            "base germ is not finitely determined within l_max; pass an explicit truncation")
    return transversal_order(verdict.order_tested, max(spec.context.m, 1)), verdict


def _x_terms(F: JetPoly, L: int) -> list[JetPoly]:
    ctx = F.context
    return [(JetPoly.variable(ctx, F.truncation, i) * F.partial(i)).with_truncation(L)
            for i in ctx.role_indices("x")]


def _derivs(F: JetPoly, role: str, L: int) -> tuple[JetPoly, ...]:
    return tuple(F.partial(i).with_truncation(L) for i in F.context.role_indices(role))


def _decide(parts, ctx: RingContext, L: int, max_dim: int | None = None):
    piv = span_pivots(parts, ctx, L, max_dim)
    cob = cobasis_from_pivots(ctx, L, piv)
    return not cob, cob


def versal_parts(spec: UnfoldingSpec, L: int) -> list[ModulePart]:
    f = spec.f.with_truncation(L + 1)
    ctx = f.context
    F = spec.F.with_truncation(L + 1)
    # dF/dt at t = 0, moved into the t-free context
    dt = tuple(F.partial(i).transfer(ctx).with_truncation(L)
               for i in spec.context.role_indices("t"))
    return [
        ModulePart((f.with_truncation(L), *_x_terms(f, L), *_derivs(f, "y", L)), None, 0),
        ModulePart(_derivs(f, "u", L), tuple(ctx.role_indices("u")), 0),
        ModulePart(dt, (), 0),
    ]


def stable_parts(spec: UnfoldingSpec, L: int) -> list[ModulePart]:
    F = spec.F.with_truncation(L + 1)
    ctx = F.context
    tvars = tuple(ctx.role_indices("t"))
    return [
        ModulePart((F.with_truncation(L), *_x_terms(F, L), *_derivs(F, "y", L)), None, 0),
        ModulePart(_derivs(F, "u", L), tvars + tuple(ctx.role_indices("u")), 0),
        ModulePart(_derivs(F, "t", L), tvars, 0),
    ]


def is_infinitesimally_versal(spec: UnfoldingSpec, L: int | None = None,
                              max_dim: int | None = None) -> StabilityReport:
    """E(r;k+n) = <f, x f_x, f_y>_E + <f_u>_{E(n)} + R<F_t|_{t=0}>, decided in J^L."""
    L, verdict = _default_truncation(spec, L)
    ok, cob = _decide(versal_parts(spec, L), spec.base_context, L, max_dim)
    return StabilityReport(ok, None, L, cob, verdict, context=spec.base_context)


def is_infinitesimally_stable(spec: UnfoldingSpec, L: int | None = None,
                              max_dim: int | None = None) -> StabilityReport:
    """E(r;k+m+n) = <F, x F_x, F_y>_E + <F_u>_{E(m+n)} + <F_t>_{E(m)}, decided in J^L."""
    L, verdict = _default_truncation(spec, L)
    ok, cob = _decide(stable_parts(spec, L), spec.context, L, max_dim)
    return StabilityReport(None, ok, L, cob, verdict, context=spec.context)


# ---------------------------------------------------------------------------
# non-degeneracy


def _require_z(ctx: RingContext) -> None:
    if ctx.u_names is None or not ctx.u_names or ctx.u_names[-1] != "z":
        raise ValueError("generating family context needs q/z role tags (see family_context)")


def _nondegenerate(F: JetPoly, include_t: bool) -> bool:
    ctx = F.context
    _require_z(ctx)
    if F.constant_term != 0:
        raise ValueError("family must vanish at the origin")
    L = max(F.truncation, 2)
    F = F.with_truncation(L)
    xs = list(ctx.role_indices("x"))
    ys = list(ctx.role_indices("y"))
    dx = [F.partial(i) for i in xs]
    dy = [F.partial(j) for j in ys]
    if any(d.constant_term != 0 for d in dx + dy):
        return False
    coords = [JetPoly.variable(ctx, L, i) for i in xs]
    if include_t:
        coords += [JetPoly.variable(ctx, L, i) for i in ctx.role_indices("t")]
    funcs = coords + [F] + dx + dy
    linear = [g.homogeneous_part(1) for g in funcs]
    return rank_of(linear) == len(funcs)


def is_C_nondegenerate(F: JetPoly) -> bool:
    """dF/dx(0) = dF/dy(0) = 0 and x, F, F_x, F_y have independent differentials."""
    if F.context.m:
        raise ValueError("C-non-degeneracy is for families without t")
    return _nondegenerate(F, include_t=False)


def is_PC_nondegenerate(F: JetPoly) -> bool:
    """As C-non-degeneracy with the time coordinate added to the independent set."""
    if F.context.m != 1:
        raise ValueError("P-C-non-degeneracy needs exactly one t variable")
    return _nondegenerate(F, include_t=True)


def check_generating_family_stable(F: JetPoly, L: int | None = None,
                                   label: str | None = None,
                                   max_dim: int | None = None) -> StabilityReport:
    """Stability of F as a t-unfolding of F|_{t=0} with u = (q, z)."""
    if not is_PC_nondegenerate(F):
        raise ValueError("family is not P-C-non-degenerate")
    report = is_infinitesimally_stable(UnfoldingSpec(F), L, max_dim)
    report.label = label
    return report
