"""Characteristic propagation of an initial front with a corner.

Each edge V_sigma (corner coordinates in sigma set to zero) is lifted to its
unit conormal covectors, which are then carried by the flow of the
homogeneous Hamiltonian H(q, p) = sqrt(p^T g(q)^-1 p).  Projecting the flowed
covectors back to positions gives the fronts W_{sigma,t}.
"""
from __future__ import annotations

import itertools
import json
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .wavefront import FrontSheet

log = logging.getLogger(__name__)

H_TOL = 1e-8
_MAX_HALVINGS = 12
_FD_STEP = 1e-6


# ---------------------------------------------------------------------------
# metric and Hamiltonian


@dataclass
class MetricSpec:
    """Riemannian metric on R^d.  ``g`` maps points (N, d) to matrices (N, d, d).

    ``inverse_grad`` optionally gives d(g^-1)/dq_k as (N, k, d, d); otherwise
    it is taken by central differences of g^-1.
    """

    dim: int
    g: Callable[[np.ndarray], np.ndarray] | None = None
    inverse_grad: Callable[[np.ndarray], np.ndarray] | None = None
    name: str = "custom"
    constant: bool = False

    @classmethod
    def euclidean(cls, dim: int) -> "MetricSpec":
        return cls(dim, None, None, "euclidean", True)

    @classmethod
    def diagonal(cls, entries: Sequence[float]) -> "MetricSpec":
        diag = np.asarray(entries, dtype=float)
        return cls(len(diag), lambda q: np.broadcast_to(np.diag(diag), (len(q),) + (len(diag),) * 2),
                   None, "diag(" + ",".join(f"{v:g}" for v in diag) + ")", True)

    def matrix(self, q: np.ndarray) -> np.ndarray:
        q = np.atleast_2d(q)
        if self.g is None:
            return np.broadcast_to(np.eye(self.dim), (len(q), self.dim, self.dim))
        return np.asarray(self.g(q), dtype=float)

    def inverse(self, q: np.ndarray) -> np.ndarray:
        q = np.atleast_2d(q)
        if self.g is None:
            return np.broadcast_to(np.eye(self.dim), (len(q), self.dim, self.dim))
        return np.linalg.inv(self.matrix(q))

    def inverse_gradient(self, q: np.ndarray) -> np.ndarray:
        q = np.atleast_2d(q)
        N, d = q.shape
        if self.g is None or self.constant:
            return np.zeros((N, d, d, d))
        if self.inverse_grad is not None:
            return np.asarray(self.inverse_grad(q), dtype=float)
        out = np.empty((N, d, d, d))
        for k in range(d):
            e = np.zeros(d)
            e[k] = _FD_STEP
            out[:, k] = (self.inverse(q + e) - self.inverse(q - e)) / (2 * _FD_STEP)
        return out

    def check(self, q: np.ndarray) -> None:
        """Symmetric positive definite at the given points (Cholesky)."""
        G = self.matrix(q)
        if not np.allclose(G, np.swapaxes(G, 1, 2), atol=1e-12):
            raise ValueError("metric is not symmetric")
        try:
            np.linalg.cholesky(G)
        except np.linalg.LinAlgError as exc:
            raise ValueError("metric is not positive definite") from exc


def hamiltonian(metric: MetricSpec, q: np.ndarray, p: np.ndarray) -> np.ndarray:
    G = metric.inverse(q)
    return np.sqrt(np.einsum("ni,nij,nj->n", p, G, p))


def _vector_field(metric: MetricSpec, q: np.ndarray, p: np.ndarray):
    G = metric.inverse(q)
    Gp = np.einsum("nij,nj->ni", G, p)
    with np.errstate(invalid="ignore"):
        H = np.sqrt(np.einsum("ni,ni->n", p, Gp))
    dG = metric.inverse_gradient(q)
    dHdq = np.einsum("ni,nkij,nj->nk", p, dG, p) / (2 * H[:, None])
    return Gp / H[:, None], -dHdq


def check_homogeneity(metric: MetricSpec, q: np.ndarray, p: np.ndarray, tol: float = 1e-10) -> bool:
    """Spot test H(q, 2p) = 2 H(q, p)."""
    return bool(np.all(np.abs(hamiltonian(metric, q, 2 * p) - 2 * hamiltonian(metric, q, p)) <= tol))


def _rk4(metric, q, p, dt):
    k1q, k1p = _vector_field(metric, q, p)
    k2q, k2p = _vector_field(metric, q + 0.5 * dt * k1q, p + 0.5 * dt * k1p)
    k3q, k3p = _vector_field(metric, q + 0.5 * dt * k2q, p + 0.5 * dt * k2p)
    k4q, k4p = _vector_field(metric, q + dt * k3q, p + dt * k3p)
    return (q + dt / 6 * (k1q + 2 * k2q + 2 * k3q + k4q),
            p + dt / 6 * (k1p + 2 * k2p + 2 * k3p + k4p))


def _step(metric, q, p, dt, H0, depth=0, parent_drift=None):
    """One RK4 step; rays whose H drifts past H_TOL are redone in two halves.

    Refinement stops for a ray once halving no longer reduces its drift
    (e.g. next to a metric singularity).
    """
    q1, p1 = _rk4(metric, q, p, dt)
    with np.errstate(invalid="ignore"):
        drift = np.abs(hamiltonian(metric, q1, p1) - H0)
    # non-finite results cannot be rescued by refining; leave them to the caller
    bad = np.isfinite(drift) & (drift > H_TOL)
    if parent_drift is not None:
        bad &= drift < parent_drift
    if bad.any() and depth < _MAX_HALVINGS:
        qa, pa = _step(metric, q[bad], p[bad], dt / 2, H0[bad], depth + 1, drift[bad])
        qb, pb = _step(metric, qa, pa, dt / 2, H0[bad], depth + 1, drift[bad])
        q1, p1 = q1.copy(), p1.copy()
        q1[bad], p1[bad] = qb, pb
    return q1, p1


def flow_states(metric: MetricSpec, q0: np.ndarray, p0: np.ndarray, t_final: float,
                dt: float = 1e-3):
    """RK4 integration of Hamilton's equations; t_final may be negative.

    Returns times (T+1,), q (T+1, N, d), p (T+1, N, d).  Rays that become
    non-finite are frozen as NaN from then on.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    steps = max(1, int(math.ceil(abs(t_final) / dt - 1e-9)))
    h = t_final / steps
    q = np.array(q0, dtype=float)
    p = np.array(p0, dtype=float)
    H0 = hamiltonian(metric, q, p)
    qs, ps = [q.copy()], [p.copy()]
    alive = np.isfinite(H0)
    for _ in range(steps):
        qn, pn = q.copy(), p.copy()
        if alive.any():
            qn[alive], pn[alive] = _step(metric, q[alive], p[alive], h, H0[alive])
        finite = np.all(np.isfinite(qn), axis=1) & np.all(np.isfinite(pn), axis=1)
        lost = alive & ~finite
        if lost.any():
            log.warning("%d rays became non-finite and were truncated", int(lost.sum()))
            alive &= finite
            qn[~alive], pn[~alive] = np.nan, np.nan
        q, p = qn, pn
        qs.append(q.copy())
        ps.append(p.copy())
    times = np.linspace(0.0, t_final, steps + 1)
    return times, np.array(qs), np.array(ps)


# ---------------------------------------------------------------------------
# initial fronts


@dataclass
class InitialFront:
    """Sampled immersion of H^r x R^k into R^d (d = r + k + 1).

    Parameter axes come corner coordinates first; each corner axis starts at
    0.  ``points`` has shape grid + (d,), ``tangents`` grid + (r + k, d).
    """

    name: str
    r: int
    k: int
    dim: int
    axes: list[np.ndarray]
    points: np.ndarray
    tangents: np.ndarray
    periodic: tuple[bool, ...] = ()

    def __post_init__(self):
        if self.r + self.k != self.dim - 1:
            raise ValueError("initial front must be a hypersurface: r + k = d - 1")
        if len(self.axes) != self.r + self.k:
            raise ValueError("need one parameter axis per corner/internal coordinate")
        for i in range(self.r):
            if self.axes[i][0] != 0 or np.any(self.axes[i] < 0):
                raise ValueError("corner axes must start at 0 and stay >= 0")
        if not self.periodic:
            self.periodic = (False,) * len(self.axes)
        flat = self.tangents.reshape(-1, self.r + self.k, self.dim)
        s = np.linalg.svd(flat, compute_uv=False)
        if np.any(s[:, -1] < 1e-12):
            raise ValueError("immersion check failed: tangent rank deficient at some sample")

    @classmethod
    def from_callable(cls, name, r, k, dim, axes, immersion, jacobian=None, periodic=()):
        axes = [np.asarray(a, dtype=float) for a in axes]
        mesh = np.meshgrid(*axes, indexing="ij")
        params = np.stack([m.ravel() for m in mesh], axis=1)
        pts = np.asarray(immersion(params), dtype=float)
        if jacobian is not None:
            tan = np.asarray(jacobian(params), dtype=float)
        else:
            tan = np.empty((len(params), r + k, dim))
            for i in range(r + k):
                e = np.zeros(r + k)
                e[i] = _FD_STEP
                tan[:, i] = (immersion(params + e) - immersion(params - e)) / (2 * _FD_STEP)
        shape = tuple(len(a) for a in axes)
        return cls(name, r, k, dim, axes, pts.reshape(shape + (dim,)),
                   tan.reshape(shape + (r + k, dim)), tuple(periodic))

    @classmethod
    def from_json(cls, data: dict | str) -> "InitialFront":
        """Sampled immersion: {r, k, dim, axes: [[...]], points: nested grid of d-vectors}."""
        if isinstance(data, str):
            data = json.loads(data)
        axes = [np.asarray(a, dtype=float) for a in data["axes"]]
        pts = np.asarray(data["points"], dtype=float)
        shape = tuple(len(a) for a in axes)
        if pts.shape != shape + (int(data["dim"]),):
            raise ValueError(f"points must have shape {shape + (int(data['dim']),)}")
        grads = np.gradient(pts, *axes, axis=tuple(range(len(axes)))) if len(axes) > 1 \
            else [np.gradient(pts, axes[0], axis=0)]
        tan = np.stack(grads, axis=-2)
        return cls(data.get("name", "sampled"), int(data["r"]), int(data["k"]), int(data["dim"]),
                   axes, pts, tan, tuple(data.get("periodic", ())))


def builtin_front(shape: str, samples: int = 201) -> InitialFront:
    """Named initial fronts: segment-with-endpoint, circle, arc, parabola,
    plane-patch, corner-wedge."""
    n = samples
    if shape == "segment-with-endpoint":
        return InitialFront.from_callable(
            shape, 1, 0, 2, [np.linspace(0, 1, n)],
            lambda P: np.stack([P[:, 0], 0 * P[:, 0]], 1),
            lambda P: np.broadcast_to([[[1.0, 0.0]]], (len(P), 1, 2)))
    if shape == "circle":
        th = np.linspace(0, 2 * np.pi, n, endpoint=False)
        return InitialFront.from_callable(
            shape, 0, 1, 2, [th],
            lambda P: np.stack([np.cos(P[:, 0]), np.sin(P[:, 0])], 1),
            lambda P: np.stack([-np.sin(P[:, 0]), np.cos(P[:, 0])], 1)[:, None, :],
            periodic=(True,))
    if shape == "arc":
        return InitialFront.from_callable(
            shape, 1, 0, 2, [np.linspace(0, np.pi / 2, n)],
            lambda P: np.stack([np.cos(P[:, 0]), np.sin(P[:, 0])], 1),
            lambda P: np.stack([-np.sin(P[:, 0]), np.cos(P[:, 0])], 1)[:, None, :])
    if shape == "parabola":
        return InitialFront.from_callable(
            shape, 0, 1, 2, [np.linspace(-1, 1, n)],
            lambda P: np.stack([P[:, 0], P[:, 0] ** 2], 1),
            lambda P: np.stack([np.ones(len(P)), 2 * P[:, 0]], 1)[:, None, :])
    m = max(3, int(round(math.sqrt(n))))
    if shape == "plane-patch":
        return InitialFront.from_callable(
            shape, 0, 2, 3, [np.linspace(-1, 1, m)] * 2,
            lambda P: np.stack([P[:, 0], P[:, 1], 0 * P[:, 0]], 1),
            lambda P: np.broadcast_to([[[1.0, 0, 0], [0, 1.0, 0]]], (len(P), 2, 3)))
    if shape == "corner-wedge":
        return InitialFront.from_callable(
            shape, 2, 0, 3, [np.linspace(0, 1, m)] * 2,
            lambda P: np.stack([P[:, 0], P[:, 1], 0 * P[:, 0]], 1),
            lambda P: np.broadcast_to([[[1.0, 0, 0], [0, 1.0, 0]]], (len(P), 2, 3)))
    raise ValueError(f"unknown shape {shape!r}")


BUILTIN_SHAPES = ("segment-with-endpoint", "circle", "arc", "parabola", "plane-patch",
                  "corner-wedge")


# ---------------------------------------------------------------------------
# conormal lift and ray bundles


@dataclass
class EdgeRays:
    sigma: tuple[int, ...]
    edge_axes: list[np.ndarray]      # parameter axes along the edge
    edge_periodic: tuple[bool, ...]
    codim: int
    directions: int                  # covectors per edge point
    times: np.ndarray                # (T+1,)
    q: np.ndarray                    # (T+1, P*D, d), point-major
    p: np.ndarray

    @property
    def edge_shape(self) -> tuple[int, ...]:
        return tuple(len(a) for a in self.edge_axes)


@dataclass
class RayBundle:
    front: InitialFront
    metric: MetricSpec
    edges: dict[tuple[int, ...], EdgeRays] = field(default_factory=dict)


def _sphere_directions(c: int, count: int) -> np.ndarray:
    """Unit vectors in R^c: +-1, a circle, or a Fibonacci sphere."""
    if c == 1:
        return np.array([[1.0], [-1.0]])
    if c == 2:
        th = 2 * np.pi * np.arange(count) / count
        return np.stack([np.cos(th), np.sin(th)], 1)
    if c == 3:
        i = np.arange(count) + 0.5
        z = 1 - 2 * i / count
        rho = np.sqrt(1 - z * z)
        phi = np.pi * (1 + 5 ** 0.5) * i
        return np.stack([rho * np.cos(phi), rho * np.sin(phi), z], 1)
    raise ValueError("conormal spheres above dimension 2 are not sampled")


def _annihilator(T: np.ndarray, d: int) -> np.ndarray:
    """Orthonormal basis of covectors vanishing on the rows of T, shape (c, d)."""
    if T.shape[0] == 0:
        return np.eye(d)
    _, s, vt = np.linalg.svd(T)
    rank = int(np.sum(s > 1e-12 * max(1.0, s[0])))
    if rank < T.shape[0]:
        raise ValueError("edge immersion is rank deficient")
    return vt[rank:]


def conormal_lift(front: InitialFront, sigma=(), metric: MetricSpec | None = None,
                  rays_per_point: int = 64) -> EdgeRays:
    """Unit (H = 1) covectors annihilating the tangent space of the edge V_sigma."""
    metric = metric or MetricSpec.euclidean(front.dim)
    sigma = tuple(sorted(set(sigma)))
    if any(i < 1 or i > front.r for i in sigma):
        raise ValueError(f"sigma must be a subset of 1..{front.r}")
    index = tuple(0 if (i < front.r and (i + 1) in sigma) else slice(None)
                  for i in range(front.r + front.k))
    along = [i for i in range(front.r + front.k) if not (i < front.r and (i + 1) in sigma)]
    pts = front.points[index].reshape(-1, front.dim)
    tan = front.tangents[index][..., along, :].reshape(len(pts), len(along), front.dim)
    metric.check(pts[:: max(1, len(pts) // 16)])
    codim = front.dim - len(along)
    dirs = _sphere_directions(codim, rays_per_point)
    G = metric.inverse(pts)
    q0, p0 = [], []
    for i in range(len(pts)):
        basis = _annihilator(tan[i], front.dim)
        # orthonormal for the dual metric so unit vectors have H = 1
        M = basis @ G[i] @ basis.T
        Lc = np.linalg.cholesky(M)
        basis = np.linalg.solve(Lc, basis)
        if codim == 1:
            # orient the single conormal consistently along the edge
            if i == 0:
                ref = basis[0]
            elif np.dot(basis[0], ref) < 0:
                basis = -basis
            ref = basis[0]
        for dvec in dirs:
            q0.append(pts[i])
            p0.append(dvec @ basis)
    q0, p0 = np.array(q0), np.array(p0)
    edge_axes = [front.axes[i] for i in along]
    edge_periodic = tuple(front.periodic[i] for i in along)
    return EdgeRays(sigma, edge_axes, edge_periodic, codim, len(dirs),
                    np.zeros(1), q0[None], p0[None])


def lift_all(front: InitialFront, metric: MetricSpec | None = None,
             rays_per_point: int = 64) -> RayBundle:
    metric = metric or MetricSpec.euclidean(front.dim)
    bundle = RayBundle(front, metric)
    for size in range(front.r + 1):
        for sigma in itertools.combinations(range(1, front.r + 1), size):
            bundle.edges[sigma] = conormal_lift(front, sigma, metric, rays_per_point)
    return bundle


def flow(bundle: RayBundle, t_final: float, dt: float = 1e-3) -> RayBundle:
    """Flow every ray of every edge from its initial covector."""
    out = RayBundle(bundle.front, bundle.metric)
    for sigma, e in bundle.edges.items():
        times, q, p = flow_states(bundle.metric, e.q[0], e.p[0], t_final, dt)
        out.edges[sigma] = EdgeRays(sigma, e.edge_axes, e.edge_periodic, e.codim, e.directions,
                                    times, q, p)
    return out


def _state_at(metric: MetricSpec, e: EdgeRays, t: float):
    times = e.times
    lo, hi = min(times[0], times[-1]), max(times[0], times[-1])
    if not lo - 1e-12 <= t <= hi + 1e-12:
        raise ValueError(f"t={t} outside the flown range [{lo}, {hi}]")
    j = int(np.argmin(np.abs(times - t)))
    if abs(times[j] - t) <= 1e-12:
        return e.q[j], e.p[j]
    # cubic Hermite between the bracketing samples
    order = np.argsort(times)
    ts = times[order]
    k = int(np.clip(np.searchsorted(ts, t) - 1, 0, len(ts) - 2))
    a, b = order[k], order[k + 1]
    h = times[b] - times[a]
    s = (t - times[a]) / h
    qa, pa, qb, pb = e.q[a], e.p[a], e.q[b], e.p[b]
    va, fa = _vector_field(metric, qa, pa)
    vb, fb = _vector_field(metric, qb, pb)
    h00, h10 = 2 * s ** 3 - 3 * s ** 2 + 1, s ** 3 - 2 * s ** 2 + s
    h01, h11 = -2 * s ** 3 + 3 * s ** 2, s ** 3 - s ** 2
    q = h00 * qa + h10 * h * va + h01 * qb + h11 * h * vb
    p = h00 * pa + h10 * h * fa + h01 * pb + h11 * h * fb
    return q, p


def action(e: EdgeRays) -> np.ndarray:
    """z along each ray: the integral of p . dq/dt (trapezoid rule), shape (T+1, N)."""
    if len(e.times) < 2:
        return np.zeros((1, e.q.shape[1]))
    dq = np.diff(e.q, axis=0)
    pm = 0.5 * (e.p[1:] + e.p[:-1])
    inc = np.einsum("tnd,tnd->tn", pm, dq)
    return np.vstack([np.zeros((1, e.q.shape[1])), np.cumsum(inc, axis=0)])


def _connectivity(e: EdgeRays):
    """Edges (curves) or triangles (surfaces) over the (edge point, direction) grid."""
    shape = e.edge_shape
    D = e.directions
    P = int(np.prod(shape)) if shape else 1
    idx = np.arange(P * D).reshape(P, D)
    segs, tris = [], []

    def line(ids, closed):
        seq = list(ids) + ([ids[0]] if closed and len(ids) > 2 else [])
        return [(seq[i], seq[i + 1]) for i in range(len(seq) - 1)]

    def quads(grid, closed0, closed1):
        n0, n1 = grid.shape
        out = []
        for i in range(n0 if closed0 else n0 - 1):
            for j in range(n1 if closed1 else n1 - 1):
                a, b = grid[i, j], grid[(i + 1) % n0, j]
                c, d = grid[(i + 1) % n0, (j + 1) % n1], grid[i, (j + 1) % n1]
                out += [(a, b, c), (a, c, d)]
        return out

    if e.codim == 1:
        for s in range(D):
            ids = idx[:, s]
            if len(shape) == 1:
                segs += line(ids, e.edge_periodic[0])
            elif len(shape) == 2:
                tris += quads(ids.reshape(shape), e.edge_periodic[0], e.edge_periodic[1])
    elif e.codim == 2:
        if len(shape) == 0:
            segs += line(idx[0], True)
        elif len(shape) == 1:
            tris += quads(idx, e.edge_periodic[0], True)
    elif e.codim == 3 and len(shape) == 0:
        from scipy.spatial import ConvexHull
        hull = ConvexHull(_sphere_directions(3, D))
        tris += [tuple(int(v) for v in s) for s in hull.simplices]
    return (np.array(segs, dtype=int).reshape(-1, 2), np.array(tris, dtype=int).reshape(-1, 3))


def project_front(bundle: RayBundle, t: float) -> list[FrontSheet]:
    """Positions of the flowed rays at time t, one sheet per edge sigma."""
    sheets = []
    d = bundle.front.dim
    for sigma in sorted(bundle.edges, key=lambda s: (len(s), s)):
        e = bundle.edges[sigma]
        q, p = _state_at(bundle.metric, e, t)
        edges, tris = _connectivity(e)
        sheets.append(FrontSheet(
            label=bundle.front.name, sigma=sigma, t=float(t), ambient_dim=d,
            param_names=tuple(f"s{i + 1}" for i in range(len(e.edge_axes))) + ("direction",),
            coord_names=tuple(f"q{i + 1}" for i in range(d)),
            vertices=np.array(q), params=_edge_params(e), states=np.hstack([q, p]),
            edges=edges, triangles=tris))
    return sheets


def _edge_params(e: EdgeRays) -> np.ndarray:
    mesh = np.meshgrid(*e.edge_axes, indexing="ij") if e.edge_axes else []
    pts = np.stack([m.ravel() for m in mesh], 1) if mesh else np.zeros((1, 0))
    rows = [np.concatenate([pt, [j]]) for pt in pts for j in range(e.directions)]
    return np.array(rows, dtype=float)


# ---------------------------------------------------------------------------
# lift of a contact family to the big 1-jet space


ContactFamily = Callable[[float, np.ndarray, float, np.ndarray], tuple]


@dataclass
class LiftCheck:
    max_residual: float
    residuals: list[float]
    h_values: list[float]
    alpha_values: list[float]


def _d(f, x0: np.ndarray, i: int, step: float):
    e = np.zeros_like(x0)
    e[i] = step
    return (np.asarray(f(x0 + e), dtype=float) - np.asarray(f(x0 - e), dtype=float)) / (2 * step)


def verify_big_jet_lift(family: ContactFamily, sample_points, alpha=None,
                        step: float = 1e-5) -> LiftCheck:
    """Check C*(dz - p dq - s dt) = alpha (dz - p dq - s dt) for the lift
    C(t, q, z, s, p) = (t, q_t, z_t, h, p_t) with
    h = dz_t/dt - p_t . dq_t/dt + alpha s.

    ``family(t, q, z, p)`` returns (q_t, z_t, p_t).  Without ``alpha`` it is
    recovered as dz_t/dz - p_t . dq_t/dz.  Samples are (t, q, z, s, p).
    """
    residuals, hs, alphas = [], [], []
    for (t, q, z, s, p) in sample_points:
        q = np.atleast_1d(np.asarray(q, dtype=float))
        p = np.atleast_1d(np.asarray(p, dtype=float))
        n = len(q)
        # coordinates w = (t, q, z, s, p)
        w0 = np.concatenate([[t], q, [z, s], p])

        def split(w):
            return w[0], w[1:1 + n], w[1 + n], w[2 + n], w[3 + n:]

        def qt(w):
            tt, qq, zz, _, pp = split(w)
            return np.atleast_1d(family(tt, qq, zz, pp)[0])

        def zt(w):
            tt, qq, zz, _, pp = split(w)
            return family(tt, qq, zz, pp)[1]

        q_t, z_t, p_t = family(t, q, z, p)
        p_t = np.atleast_1d(np.asarray(p_t, dtype=float))
        dqt = [_d(qt, w0, i, step) for i in range(len(w0))]
        dzt = [float(_d(zt, w0, i, step)) for i in range(len(w0))]
        if alpha is None:
            a = dzt[1 + n] - float(p_t @ dqt[1 + n])
        else:
            a = float(alpha(t, q, z, p))
        h = dzt[0] - float(p_t @ dqt[0]) + a * s
        # coefficient of dw_i in the pullback, and in alpha * Theta
        pull = np.array([dzt[i] - float(p_t @ dqt[i]) - (h if i == 0 else 0.0)
                         for i in range(len(w0))])
        target = np.zeros(len(w0))
        target[0] = -a * s
        target[1:1 + n] = -a * p
        target[1 + n] = a
        residuals.append(float(np.max(np.abs(pull - target))))
        hs.append(h)
        alphas.append(a)
    return LiftCheck(max(residuals) if residuals else 0.0, residuals, hs, alphas)


def identity_family(t, q, z, p):
    return q, z, p


def translation_family(v, c):
    v = np.atleast_1d(np.asarray(v, dtype=float))

    def fam(t, q, z, p):
        return q + t * v, z + t * c, p
    return fam


def scaling_family(t, q, z, p):
    return q, math.exp(t) * z, math.exp(t) * p
