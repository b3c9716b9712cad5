"""Fronts W_{sigma,t} of a generating family, cusp detection and export.

For an edge sigma of the corner the front is the image in (q, z) of

    x_sigma = 0,  F = dF/dx_free = dF/dy = 0,  x_free >= 0.

Catalog families are affine in z and in most q's, so after choosing which
unknowns to solve for, each sample of the remaining variables gives a small
linear system.  Variables that are neither solved nor pinned by a linear
constraint become the parameters of the sheet.
"""
from __future__ import annotations

import itertools
import json
import logging
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .jetalg import JetPoly

log = logging.getLogger(__name__)

EQ_TOL = 1e-9
BISECT_TOL = 1e-10
_RNG_SEED = 20240601


@dataclass(frozen=True)
class Sampling:
    window: float = 1.5
    curve_points: int = 400
    surface_points: int = 120


@dataclass
class FrontSheet:
    label: str
    sigma: tuple[int, ...]
    t: float
    ambient_dim: int
    param_names: tuple[str, ...]
    coord_names: tuple[str, ...]
    vertices: np.ndarray          # (N, ambient_dim): (q_1, .., q_n, z)
    params: np.ndarray            # (N, len(param_names))
    states: np.ndarray            # (N, nvars): every variable of the family
    edges: np.ndarray             # (M, 2) polyline segments (curves)
    triangles: np.ndarray         # (M, 3) faces (surfaces)
    markers: list[tuple[int, str]] = field(default_factory=list)
    method: str = "linear"
    diagnostics: list[str] = field(default_factory=list)

    @property
    def sigma_tag(self) -> str:
        return "".join(str(i) for i in self.sigma) if self.sigma else "empty"

    def markers_of(self, kind: str) -> list[int]:
        return [i for i, k in self.markers if k == kind]

    def interior_cusps(self) -> list[int]:
        return self.markers_of("cusp")

    def is_empty(self) -> bool:
        return len(self.vertices) == 0

    def to_json(self) -> dict:
        return {
            "label": self.label,
            "sigma": list(self.sigma),
            "t": _num(self.t),
            "ambient_dim": self.ambient_dim,
            "coordinates": list(self.coord_names),
            "parameters": list(self.param_names),
            "vertices": [[_num(v) for v in row] for row in self.vertices],
            "parameter_values": [[_num(v) for v in row] for row in self.params],
            "connectivity": {"edges": self.edges.tolist(), "triangles": self.triangles.tolist()},
            "markers": [{"index": i, "kind": k} for i, k in self.markers],
            "method": self.method,
            "diagnostics": list(self.diagnostics),
        }


@dataclass
class BifurcationSeries:
    label: str
    t_values: tuple[float, ...]
    sheets: dict[tuple[tuple[int, ...], float], FrontSheet]

    @property
    def ambient_dim(self) -> int:
        dims = {s.ambient_dim for s in self.sheets.values()}
        if len(dims) != 1:
            raise ValueError("sheets have mixed ambient dimensions")
        return dims.pop()

    def sigmas(self) -> list[tuple[int, ...]]:
        return sorted({s for s, _ in self.sheets}, key=lambda s: (len(s), s))

    def at(self, t: float) -> list[FrontSheet]:
        return [self.sheets[(s, t)] for s in self.sigmas() if (s, t) in self.sheets]


def _num(v: float) -> float:
    """Round for stable text output; also turns -0.0 into 0.0."""
    v = float(v)
    if not np.isfinite(v):
        return v
    r = float(f"{v:.12g}")
    return 0.0 if r == 0 else r


# ---------------------------------------------------------------------------
# the system for one edge


def _affine_in(poly: JetPoly, idx: set[int]) -> bool:
    return all(sum(m[i] for i in idx) <= 1 for m, _ in poly.items())


def _det_poly(rows: list[list[JetPoly]]) -> JetPoly:
    n = len(rows)
    T = sum(max((p.degree for p in row if not p.is_zero()), default=0) for row in rows) + 1
    rows = [[p.with_truncation(max(T, p.truncation)) for p in row] for row in rows]
    ctx = rows[0][0].context
    T = rows[0][0].truncation
    total = JetPoly.zero(ctx, T)
    for perm in itertools.permutations(range(n)):
        sign = 1
        for i in range(n):
            for j in range(i + 1, n):
                if perm[i] > perm[j]:
                    sign = -sign
        term = JetPoly.constant(ctx, T, sign)
        for i, j in enumerate(perm):
            term = term * rows[i][j]
            if term.is_zero():
                break
        total = total + term
    return total


@dataclass
class _Derived:
    var: int
    coef: float         # constraint c*var + g = 0
    g: JetPoly


class EdgeSystem:
    """Equations of the sigma-front and how they are solved."""

    def __init__(self, F: JetPoly, sigma: tuple[int, ...]):
        ctx = F.context
        self.F = F
        self.ctx = ctx
        xs = list(ctx.role_indices("x"))
        bad = [i for i in sigma if i < 1 or i > len(xs)]
        if bad:
            raise ValueError(f"sigma entries must lie in 1..{len(xs)}")
        self.sigma = tuple(sorted(set(sigma)))
        self.x_zero = [xs[i - 1] for i in self.sigma]
        self.x_free = [x for x in xs if x not in self.x_zero]
        self.ys = list(ctx.role_indices("y"))
        self.ts = list(ctx.role_indices("t"))
        us = list(ctx.role_indices("u"))
        if not ctx.u_names or ctx.u_names[-1] != "z":
            raise ValueError("family needs the (q, z) parameter layout")
        self.qs = us[:-1]
        self.z = us[-1]
        G = F.substitute_zero(self.x_zero)
        self.equations = [G] + [G.partial(i) for i in self.x_free + self.ys]
        self.derived: list[_Derived] = []
        self.solve: list[int] = []
        self.method = "linear"
        self.inconsistent = False
        self._choose()

    # -- structure -------------------------------------------------------
    def _choose(self) -> None:
        candidates = [self.z] + self.qs
        eqs = self.equations
        constraints = [e for e in eqs if not any(e.involves(c) for c in candidates)]
        active = [e for e in eqs if any(e.involves(c) for c in candidates)]
        free_order = self.ys + self.x_free + self.qs
        for c in constraints:
            self._add_constraint(c, free_order)
        rows_needed = len(active)
        best = None
        for subset in itertools.combinations(candidates, rows_needed):
            idx = set(subset)
            if not all(_affine_in(e, idx) for e in active):
                continue
            det = _det_poly([[e.partial(v) for v in subset] for e in active])
            if det.is_zero():
                continue
            rank = (0 if det.degree == 0 else 1, det.degree)
            if best is None or rank < best[0]:
                best = (rank, subset)
        if best is not None:
            self.solve = list(best[1])
            self.active = active
        else:
            self.method = "newton"
            self.active = active
            self.solve = self._newton_unknowns(candidates, rows_needed)
        taken = set(self.solve) | {d.var for d in self.derived}
        self.params = [v for v in self.x_free + self.ys + self.qs if v not in taken]
        self._coef = [[e.partial(v) for v in self.solve] for e in self.active]
        self._const = [e.substitute_zero(self.solve) for e in self.active]

    def _add_constraint(self, c: JetPoly, order: list[int]) -> None:
        if c.is_zero():
            return
        if c.degree == 0:
            # a nonzero constant equation: no point lies on this front
            self.inconsistent = True
            return
        taken = {d.var for d in self.derived}
        for v in order:
            if v in taken or not c.involves(v):
                continue
            dv = c.partial(v)
            if dv.degree != 0:
                continue
            g = c.substitute_zero([v])
            if g.involves(v) or any(g.involves(d.var) for d in self.derived):
                continue
            self.derived.append(_Derived(v, float(dv.constant_term), g))
            return
        raise ValueError(f"cannot resolve constraint {c.to_text()} = 0 on the front")

    def _newton_unknowns(self, candidates, rows_needed) -> list[int]:
        rng = np.random.default_rng(_RNG_SEED)
        point = rng.uniform(-0.7, 0.7, self.ctx.nvars)
        for subset in itertools.combinations(candidates, rows_needed):
            J = np.array([[e.partial(v).evaluate(point) for v in subset] for e in self.active],
                         dtype=float)
            if rows_needed == 0 or abs(np.linalg.det(J)) > 1e-8:
                return list(subset)
        raise ValueError("front equations are degenerate: no solvable set of unknowns")

    @property
    def param_names(self) -> tuple[str, ...]:
        return tuple(self.ctx.names[v] for v in self.params)

    def param_bounds(self, window: float) -> list[tuple[float, float]]:
        return [(0.0, window) if v in self.x_free else (-window, window) for v in self.params]

    # -- evaluation ------------------------------------------------------
    def _values(self, P: np.ndarray, t: float) -> list:
        N = P.shape[0]
        vals: list = [np.zeros(N) for _ in range(self.ctx.nvars)]
        for i in self.ts:
            vals[i] = np.full(N, float(t))
        for j, v in enumerate(self.params):
            vals[v] = P[:, j].astype(float)
        for d in self.derived:
            vals[d.var] = -np.asarray(d.g.evaluate(vals), dtype=float) * np.ones(N) / d.coef
        return vals

    def _matrix(self, polys, vals, N):
        return np.array([[np.broadcast_to(np.asarray(p.evaluate(vals), dtype=float), (N,))
                          for p in row] for row in polys]).transpose(2, 0, 1) \
            if polys and polys[0] else np.zeros((N, len(polys), 0))

    def _vector(self, polys, vals, N):
        if not polys:
            return np.zeros((N, 0))
        return np.array([np.broadcast_to(np.asarray(p.evaluate(vals), dtype=float), (N,))
                         for p in polys]).T

    def solve_at(self, P: np.ndarray, t: float):
        """States (nvars, N) and a validity mask for parameter samples P (N, p)."""
        P = np.atleast_2d(np.asarray(P, dtype=float))
        N = P.shape[0]
        vals = self._values(P, t)
        valid = np.full(N, not self.inconsistent)
        for d in self.derived:
            if d.var in self.x_free:
                valid &= vals[d.var] >= 0
        s = len(self.solve)
        if s:
            if self.method == "linear":
                u, ok = self._linear(vals, N)
            else:
                u, ok = self._newton(vals, N)
            valid &= ok
            for j, v in enumerate(self.solve):
                vals[v] = np.where(ok, u[:, j], np.nan)
        states = np.array([np.broadcast_to(np.asarray(v, dtype=float), (N,)) for v in vals])
        valid &= np.all(np.isfinite(states), axis=0)
        return states, valid

    def _linear(self, vals, N):
        A = self._matrix(self._coef, vals, N)
        b = self._vector(self._const, vals, N)
        det = np.linalg.det(A)
        ok = np.abs(det) > 1e-14
        A_safe = np.where(ok[:, None, None], A, np.eye(A.shape[1])[None])
        u = np.linalg.solve(A_safe, -b[..., None])[..., 0]
        return u, ok

    def _newton(self, vals, N, iters: int = 60):
        s = len(self.solve)
        u = np.zeros((N, s))
        jac = [[e.partial(v) for v in self.solve] for e in self.active]
        ok = np.zeros(N, dtype=bool)
        for _ in range(iters):
            for j, v in enumerate(self.solve):
                vals[v] = u[:, j]
            r = self._vector(self.active, vals, N)
            J = self._matrix(jac, vals, N)
            det = np.linalg.det(J)
            good = np.abs(det) > 1e-14
            J = np.where(good[:, None, None], J, np.eye(s)[None])
            step = np.linalg.solve(J, -r[..., None])[..., 0]
            norm = np.linalg.norm(step, axis=1)
            damp = np.minimum(1.0, 1.0 / np.maximum(norm, 1e-300))
            u = u + np.where(good[:, None], step * damp[:, None], 0.0)
            ok = good & (np.linalg.norm(r, axis=1) < EQ_TOL * 1e-2)
            if ok.all():
                break
        return u, ok

    def residuals(self, states: np.ndarray) -> np.ndarray:
        """|equation| values at recorded states, shape (N, len(equations))."""
        vals = list(states)
        N = states.shape[1]
        return np.abs(np.array([np.broadcast_to(np.asarray(e.evaluate(vals), dtype=float), (N,))
                                for e in self.equations]).T)

    # -- singular set ----------------------------------------------------
    def _total(self, poly: JetPoly, j: int, vals, N):
        """d poly / d param_j with derived variables following the constraints."""
        out = np.broadcast_to(np.asarray(poly.partial(self.params[j]).evaluate(vals), dtype=float),
                              (N,)).copy()
        for d in self.derived:
            dd = -np.asarray(d.g.partial(self.params[j]).evaluate(vals), dtype=float) / d.coef
            out = out + np.asarray(poly.partial(d.var).evaluate(vals), dtype=float) * dd
        return out

    def q_jacobian(self, P: np.ndarray, t: float):
        """d(q_1..q_n)/d(params) at samples P, shape (N, n, p)."""
        states, valid = self.solve_at(P, t)
        vals = list(states)
        N = states.shape[1]
        p = len(self.params)
        s = len(self.solve)
        du = np.zeros((N, s, p))
        if s:
            A = self._matrix(self._coef, vals, N)
            A = np.where(valid[:, None, None], A, np.eye(s)[None])
            u = np.array([vals[v] for v in self.solve]).T
            for j in range(p):
                dA = np.array([[self._total(c, j, vals, N) for c in row] for row in self._coef]
                              ).transpose(2, 0, 1)
                db = np.array([self._total(c, j, vals, N) for c in self._const]).T
                rhs = -(np.einsum("nij,nj->ni", dA, np.nan_to_num(u)) + db)
                du[:, :, j] = np.linalg.solve(A, rhs[..., None])[..., 0]
        Jq = np.zeros((N, len(self.qs), p))
        for i, q in enumerate(self.qs):
            if q in self.params:
                Jq[:, i, self.params.index(q)] = 1.0
            elif q in self.solve:
                Jq[:, i, :] = du[:, self.solve.index(q), :]
            else:
                for d in self.derived:
                    if d.var == q:
                        for j in range(p):
                            Jq[:, i, j] = -np.asarray(d.g.partial(self.params[j]).evaluate(vals)) / d.coef
        return Jq, valid

    def singular_value(self, P: np.ndarray, t: float):
        """det of the q-Jacobian; its zeros are the singular points of the front."""
        Jq, valid = self.q_jacobian(P, t)
        if Jq.shape[1] != Jq.shape[2]:
            raise ValueError("front parameterization is not square")
        return np.linalg.det(Jq), valid


# ---------------------------------------------------------------------------
# sampling


def _grid(bounds, sampling: Sampling):
    if len(bounds) == 1:
        lo, hi = bounds[0]
        return [np.linspace(lo, hi, sampling.curve_points)]
    if len(bounds) == 2:
        return [np.linspace(lo, hi, sampling.surface_points) for lo, hi in bounds]
    raise ValueError(f"sampling supports fronts of dimension 1 or 2, got {len(bounds)}")


def _coords(system: EdgeSystem, states: np.ndarray) -> np.ndarray:
    return states[system.qs + [system.z]].T


def criminant_solve(F: JetPoly, sigma=(), t: float = 0.0, sampling: Sampling | None = None,
                    label: str = "", detect: bool = True) -> FrontSheet:
    """Sample the front W_{sigma,t} of the family F."""
    sampling = sampling or Sampling()
    system = EdgeSystem(F, tuple(sigma))
    bounds = system.param_bounds(sampling.window)
    axes = _grid(bounds, sampling)
    if len(axes) == 1:
        P = axes[0][:, None]
    else:
        A, B = np.meshgrid(axes[0], axes[1], indexing="ij")
        P = np.stack([A.ravel(), B.ravel()], axis=1)
    states, valid = system.solve_at(P, t)
    diagnostics = []
    dropped = int((~valid).sum())
    if dropped:
        diagnostics.append(f"{dropped} samples dropped (singular or outside x >= 0)")
        log.info("sigma=%s t=%s: %d samples dropped", system.sigma, t, dropped)
    res = system.residuals(np.nan_to_num(states[:, valid]))
    if res.size and res.max() > EQ_TOL:
        bad = res.max(axis=1) > EQ_TOL
        diagnostics.append(f"{int(bad.sum())} samples above residual tolerance dropped")
        idx = np.flatnonzero(valid)
        valid[idx[bad]] = False
    # compact the valid samples and rebuild connectivity on them
    new_index = -np.ones(len(P), dtype=int)
    keep = np.flatnonzero(valid)
    new_index[keep] = np.arange(len(keep))
    edges = np.zeros((0, 2), dtype=int)
    tris = np.zeros((0, 3), dtype=int)
    if len(axes) == 1:
        a, b = np.arange(len(P) - 1), np.arange(1, len(P))
        ok = valid[a] & valid[b]
        edges = np.stack([new_index[a[ok]], new_index[b[ok]]], axis=1)
    else:
        n0, n1 = len(axes[0]), len(axes[1])
        grid = np.arange(n0 * n1).reshape(n0, n1)
        v00, v01 = grid[:-1, :-1].ravel(), grid[:-1, 1:].ravel()
        v10, v11 = grid[1:, :-1].ravel(), grid[1:, 1:].ravel()
        ok = valid[v00] & valid[v01] & valid[v10] & valid[v11]
        t1 = np.stack([v00[ok], v10[ok], v11[ok]], axis=1)
        t2 = np.stack([v00[ok], v11[ok], v01[ok]], axis=1)
        tris = new_index[np.stack([t1, t2], axis=1).reshape(-1, 3)]
    sheet = FrontSheet(
        label=label, sigma=system.sigma, t=float(t), ambient_dim=len(system.qs) + 1,
        param_names=system.param_names,
        coord_names=tuple(system.ctx.names[v] for v in system.qs + [system.z]),
        vertices=_coords(system, states[:, keep]), params=P[keep], states=states[:, keep].T,
        edges=edges.astype(int), triangles=tris.astype(int), method=system.method,
        diagnostics=diagnostics)
    if not len(keep):
        sheet.diagnostics.append("empty sheet: no sample satisfies the front equations")
    if detect:
        detect_singular_points(sheet, F, sampling, _system=system, _grid_axes=axes,
                               _grid_valid=valid, _grid_index=new_index)
    return sheet


def _bisect(system: EdgeSystem, t: float, pa: np.ndarray, pb: np.ndarray, fa: np.ndarray):
    """Refine sign changes of the singular value on segments [pa, pb] together."""
    a, b, fa = pa.copy(), pb.copy(), fa.copy()
    alive = np.ones(len(a), dtype=bool)
    for _ in range(200):
        if np.max(np.abs(b - a)) <= BISECT_TOL:
            break
        mid = 0.5 * (a + b)
        fm, ok = system.singular_value(mid, t)
        alive &= ok
        left = np.sign(fm) == np.sign(fa)
        exact = fm == 0
        a = np.where((left & ~exact)[:, None], mid, a)
        fa = np.where(left & ~exact, fm, fa)
        b = np.where((~left | exact)[:, None], mid, b)
        a = np.where(exact[:, None], mid, a)
    return 0.5 * (a + b), alive


def detect_singular_points(sheet: FrontSheet, F: JetPoly, sampling: Sampling | None = None,
                           _system: EdgeSystem | None = None, _grid_axes=None,
                           _grid_valid=None, _grid_index=None) -> FrontSheet:
    """Mark cusps (rank drops of the parameterization) and x = 0 boundary points.

    Zero crossings of the q-Jacobian determinant along grid lines are refined
    by bisection and appended as extra vertices.  A zero sitting on x = 0 is
    labelled ``boundary-cusp`` and is not counted as interior.
    """
    sampling = sampling or Sampling()
    system = _system or EdgeSystem(F, sheet.sigma)
    t = sheet.t
    markers = [(i, k) for i, k in sheet.markers if k not in ("cusp", "boundary", "boundary-cusp")]
    x_cols = [j for j, v in enumerate(system.params) if v in system.x_free]
    on_boundary = np.zeros(len(sheet.params), dtype=bool)
    for j in x_cols:
        on_boundary |= sheet.params[:, j] == 0.0
    for i in np.flatnonzero(on_boundary):
        markers.append((int(i), "boundary"))
    if len(system.params) != len(system.qs) or sheet.is_empty():
        sheet.markers = markers
        return sheet
    if _grid_axes is None:
        bounds = system.param_bounds(sampling.window)
        _grid_axes = _grid(bounds, sampling)
    axes = _grid_axes
    if len(axes) == 1:
        P = axes[0][:, None]
        lines = [np.arange(len(P))]
    else:
        A, B = np.meshgrid(axes[0], axes[1], indexing="ij")
        P = np.stack([A.ravel(), B.ravel()], axis=1)
        grid = np.arange(len(P)).reshape(len(axes[0]), len(axes[1]))
        lines = [grid[i, :] for i in range(grid.shape[0])] + [grid[:, j] for j in range(grid.shape[1])]
    det, ok = system.singular_value(P, t)
    if _grid_valid is not None:
        ok = ok & _grid_valid
    new_vertices, new_params, new_states = [], [], []
    seen_zero = set()

    def add_point(p):
        states, valid = system.solve_at(p[None], t)
        if not valid[0]:
            return
        idx = len(sheet.vertices) + len(new_vertices)
        new_vertices.append(_coords(system, states)[0])
        new_params.append(p)
        new_states.append(states[:, 0])
        boundary = any(abs(p[j]) <= BISECT_TOL for j in x_cols)
        markers.append((idx, "boundary-cusp" if boundary else "cusp"))

    seg_a, seg_b = [], []
    for line in lines:
        for a, b in zip(line[:-1], line[1:]):
            if not (ok[a] and ok[b]):
                continue
            fa, fb = det[a], det[b]
            if fa == 0 or fb == 0:
                for i in (a, b):
                    if det[i] == 0 and i not in seen_zero:
                        seen_zero.add(i)
                        add_point(P[i])
            elif np.sign(fa) != np.sign(fb):
                seg_a.append(a)
                seg_b.append(b)
    if seg_a:
        roots, alive = _bisect(system, t, P[seg_a], P[seg_b], det[seg_a])
        for root in roots[alive]:
            add_point(root)
    if new_vertices:
        sheet.vertices = np.vstack([sheet.vertices, np.array(new_vertices)])
        sheet.params = np.vstack([sheet.params, np.array(new_params)])
        sheet.states = np.vstack([sheet.states, np.array(new_states)])
    sheet.markers = markers
    return sheet


def bifurcation_series(label: str, signs=None, variant: int = 1, t_values=(-1.0, 0.0, 1.0),
                       sampling: Sampling | None = None, F: JetPoly | None = None,
                       workers: int | None = None) -> BifurcationSeries:
    """Fronts of every edge sigma at each time for a catalog entry."""
    from .catalog import find_entry

    if F is None:
        entry = find_entry(label, signs, variant)
        F = entry.polynomial()
        label = entry.label
    t_values = tuple(float(t) for t in t_values)
    if any(b <= a for a, b in zip(t_values, t_values[1:])):
        raise ValueError("t values must be strictly increasing")
    r = len(F.context.role_indices("x"))
    sigmas = [s for size in range(r + 1) for s in itertools.combinations(range(1, r + 1), size)]
    tasks = [(s, t) for t in t_values for s in sigmas]
    workers = workers if workers is not None else _threads()
    if workers > 1 and len(tasks) > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda st: criminant_solve(F, st[0], st[1], sampling, label),
                                    tasks))
    else:
        results = [criminant_solve(F, s, t, sampling, label) for s, t in tasks]
    return BifurcationSeries(label, t_values, dict(zip(tasks, results)))


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("RETFRONT_THREADS", "1")))
    except ValueError:
        return 1


# ---------------------------------------------------------------------------
# export


def _tag(t: float) -> str:
    return f"{_num(t):g}".replace("-", "m").replace(".", "p")


def _fmt(v: float) -> str:
    return f"{_num(v):.6f}"


_COLORS = ("#1f4e9a", "#c0392b", "#2e8b57", "#8e44ad")


def _svg(sheets: list[FrontSheet], bbox) -> str:
    (x0, x1), (y0, y1) = bbox
    w, h = x1 - x0, y1 - y0
    width = 600.0
    height = width * h / w if w > 0 else width
    sx = width / w if w > 0 else 1.0
    sy = height / h if h > 0 else 1.0

    def pt(v):
        return f"{_fmt((v[0] - x0) * sx)},{_fmt((y1 - v[1]) * sy)}"

    out = ['<?xml version="1.0" encoding="UTF-8"?>',
           f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
           f'width="{_fmt(width)}" height="{_fmt(height)}" '
           f'viewBox="0 0 {_fmt(width)} {_fmt(height)}">']
    for n, sheet in enumerate(sheets):
        color = _COLORS[n % len(_COLORS)]
        out.append(f'<g id="sigma-{sheet.sigma_tag}" data-t="{_num(sheet.t):g}">')
        for run in _runs(sheet):
            points = " ".join(pt(sheet.vertices[i]) for i in run)
            out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{points}"/>')
        for i, kind in sheet.markers:
            c = pt(sheet.vertices[i]).split(",")
            fill = "#000000" if kind == "cusp" else color
            out.append(f'<circle class="{kind}" cx="{c[0]}" cy="{c[1]}" r="3" fill="{fill}"/>')
        out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _runs(sheet: FrontSheet) -> list[list[int]]:
    runs: list[list[int]] = []
    for a, b in sheet.edges.tolist():
        if runs and runs[-1][-1] == a:
            runs[-1].append(b)
        else:
            runs.append([a, b])
    return runs


def _obj(sheets: list[FrontSheet]) -> str:
    out = []
    base = 0
    for sheet in sheets:
        out.append(f"g sigma_{sheet.sigma_tag}_t_{_tag(sheet.t)}")
        for v in sheet.vertices:
            out.append("v " + " ".join(_fmt(c) for c in v))
        for a, b in sheet.edges.tolist():
            out.append(f"l {a + base + 1} {b + base + 1}")
        for tri in sheet.triangles.tolist():
            out.append("f " + " ".join(str(i + base + 1) for i in tri))
        for i, kind in sheet.markers:
            if kind != "boundary":
                out.append(f"p {i + base + 1}")
        base += len(sheet.vertices)
    return "\n".join(out) + "\n"


def _bbox(sheets: list[FrontSheet]):
    pts = [s.vertices for s in sheets if len(s.vertices)]
    if not pts:
        return ((-1.0, 1.0), (-1.0, 1.0))
    allv = np.vstack(pts)
    lo, hi = allv.min(axis=0), allv.max(axis=0)
    pad = 0.05 * max(float(np.max(hi - lo)), 1e-9)
    return ((float(lo[0]) - pad, float(hi[0]) + pad), (float(lo[-1]) - pad, float(hi[-1]) + pad))


def export_geometry(series: BifurcationSeries, fmt: str, out_dir) -> list[Path]:
    """Write one file per (sigma, t) plus an overlay per t; returns the paths."""
    fmt = fmt.lower()
    if fmt not in ("svg", "obj", "json"):
        raise ValueError(f"unknown format {fmt!r}")
    dim = series.ambient_dim if series.sheets else 2
    if fmt == "svg" and dim != 2:
        raise ValueError("SVG export needs 2-dimensional fronts (n = 1); use obj or json")
    if fmt == "obj" and dim != 3:
        raise ValueError("OBJ export needs 3-dimensional fronts (n = 2); use svg or json")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    bbox = _bbox(list(series.sheets.values()))
    written = []
    stem = series.label or "front"
    for t in series.t_values:
        sheets = series.at(t)
        for sheet in sheets:
            written.append(_write(out_dir / f"{stem}_sigma-{sheet.sigma_tag}_t{_tag(t)}.{fmt}",
                                  fmt, [sheet], bbox))
        written.append(_write(out_dir / f"{stem}_overlay_t{_tag(t)}.{fmt}", fmt, sheets, bbox))
    return written


def _write(path: Path, fmt: str, sheets: list[FrontSheet], bbox) -> Path:
    if fmt == "svg":
        text = _svg(sheets, bbox)
    elif fmt == "obj":
        text = _obj(sheets)
    else:
        text = json.dumps({"sheets": [s.to_json() for s in sheets]}, indent=1, sort_keys=True) + "\n"
    path.write_text(text, encoding="utf-8")
    return path
