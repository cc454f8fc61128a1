"""Rate function I(w) = sup_k (w.k - z(k) + z(0)) on every branch.

The dual objective ``w.k - z(k)`` is concave; its superdifferential at
``k`` is ``w - dz(k)``.  In one dimension the maximizer is bracketed and
found by bisection on the sign of that superdifferential, with Newton
steps through ``J(k)`` wherever z is smooth.  Points of the relative
boundary of the domain are handled by their exposed face: sending
``k`` to infinity along the outer normal leaves only the waiting times
whose reward ratio ``f(s)/s`` sits on that face.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import optimize, spatial

from .freeenergy import (
    ConvergenceError,
    FreeEnergyPoint,
    MomentDivergence,
    free_energy,
    z_value,
)
from .model import PinningModel, RewardSpec, TailSpec, WeightModel, _tail_grid
from .series import BOUNDARY_TOL, grand_moment, grand_sum, log_grand_sum, theta_base, weighted_sums

MAX_ITER = 200
GRAD_TOL = 1e-9

BRANCHES = ("interior_newton", "segment", "at_r", "boundary_limit", "outside_domain")


class NotApplicable(ValueError):
    """The closed-form suite does not apply to this model."""


@dataclass(frozen=True)
class RateResult:
    w: np.ndarray
    value: float
    branch: str
    dual_k: Optional[np.ndarray] = None
    theta_residual: Optional[float] = None

    def as_dict(self) -> dict:
        return {
            "w": self.w.tolist(),
            "I": self.value,
            "branch": self.branch,
            "dual_k": None if self.dual_k is None else self.dual_k.tolist(),
        }


# ---------------------------------------------------------------------------
# domain


@dataclass(frozen=True)
class DomainDescriptor:
    """Closed convex hull of the reward ratios f(s)/s, plus the limit r."""

    points: np.ndarray
    lower: Optional[float] = None
    upper: Optional[float] = None
    lower_closed: bool = True
    upper_closed: bool = True
    _hull: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def support(self, k) -> float:
        """sup over the domain of k.w."""
        return float(np.max(self.points @ np.asarray(k, dtype=float)))

    def _excess(self, w) -> float:
        w = np.asarray(w, dtype=float)
        if self.dim == 1:
            return max(self.lower - w[0], w[0] - self.upper)
        if self._hull is None:
            raise ValueError("domain hull is degenerate; reduce the dimension first")
        return float(np.max(self._hull[:, :-1] @ w + self._hull[:, -1]))

    def contains_closure(self, w, tol: float = 1e-12) -> bool:
        scale = 1.0 + float(np.max(np.abs(self.points)))
        return self._excess(w) <= tol * scale

    def on_boundary(self, w, tol: float = 1e-12) -> bool:
        scale = 1.0 + float(np.max(np.abs(self.points)))
        return abs(self._excess(w)) <= tol * scale


def _ratio_points(model: PinningModel) -> tuple[np.ndarray, np.ndarray]:
    """(attained ratios f(s)/s, the same plus the tail limit r)."""
    sup = model.weights.support_head
    pts = [model.rewards.head[sup - 1] / sup[:, None]]
    if model.tail is not None:
        s = _tail_grid(model.size)
        pts.append(model.reward_values(s.astype(np.int64)) / s[:, None])
    attained = np.vstack(pts)
    return attained, np.vstack([attained, np.asarray(model.r)[None, :]])


def domain(model: PinningModel) -> DomainDescriptor:
    attained, allpts = _ratio_points(model)
    if model.dim == 1:
        lo, hi = float(allpts.min()), float(allpts.max())
        return DomainDescriptor(
            allpts,
            lo,
            hi,
            bool(np.any(attained == lo)),
            bool(np.any(attained == hi)),
        )
    pts = np.unique(allpts, axis=0)
    try:
        hull = spatial.ConvexHull(pts)
        eq = hull.equations
        pts = pts[hull.vertices]
    except spatial.QhullError:
        eq = None
    return DomainDescriptor(pts, _hull=eq)


# ---------------------------------------------------------------------------
# dimension reduction


@dataclass(frozen=True)
class Reduction:
    model: Optional[PinningModel]
    A_o: np.ndarray  # (d_o, d)
    a_o: np.ndarray  # (d_o,)
    r: np.ndarray

    @property
    def dim(self) -> int:
        return self.A_o.shape[0]

    def project(self, w) -> Optional[np.ndarray]:
        """A_o w + a_o, or None when w leaves the affine hull of the domain."""
        w = np.asarray(w, dtype=float)
        dw = w - self.r
        resid = dw - self.A_o.T @ (self.A_o @ dw)
        if np.linalg.norm(resid) > 1e-10 * (1.0 + np.linalg.norm(w)):
            return None
        return self.A_o @ w + self.a_o


def reduce_dimension(model: PinningModel) -> tuple[Optional[PinningModel], np.ndarray, np.ndarray]:
    """Drop reward directions that never vary relative to r s.

    Returns ``(reduced model, A_o, a_o)`` with ``I(w) = I_o(A_o w + a_o)`` on
    the domain.  Full-rank input returns the model itself with the identity.
    """
    red = _reduction(model)
    return red.model, red.A_o, red.a_o


def _reduction(model: PinningModel) -> Reduction:
    d = model.dim
    r = np.asarray(model.r, dtype=float)
    sup = model.weights.support_head
    rows = [model.rewards.head[sup - 1] - np.outer(sup, r)]
    if model.tail is not None:
        rows.append(model.rewards.offset[None, :])
        rows.append(model.rewards.log_coef[None, :])
    G = np.vstack(rows)
    _, sv, vt = np.linalg.svd(G, full_matrices=False)
    tol = 1e-12 * max(1.0, float(sv[0]) if len(sv) else 0.0)
    rank = int(np.sum(sv > tol))
    if rank == d:
        return Reduction(model, np.eye(d), np.zeros(d), r)
    A = vt[:rank].T  # (d, d_o) orthonormal columns
    if rank == 0:
        return Reduction(None, np.zeros((0, d)), np.zeros(0), r)
    rw = model.rewards
    head = (rw.head - np.outer(np.arange(1, model.size + 1), r)) @ A
    reduced = RewardSpec(head, np.zeros(rank), rw.offset @ A, rw.log_coef @ A)
    return Reduction(model.with_rewards(reduced), A.T, -A.T @ r, r)


# ---------------------------------------------------------------------------
# the solver


def _face_model(model: PinningModel, endpoint: float) -> Optional[PinningModel]:
    """Sub-model of the waiting times whose ratio f(s)/s equals ``endpoint``."""
    sup = model.weights.support_head
    ratio = model.rewards.head[sup - 1, 0] / sup
    keep = np.zeros(model.size, dtype=bool)
    tol = 1e-14 * max(1.0, abs(endpoint))
    keep[sup[np.abs(ratio - endpoint) <= tol] - 1] = True
    tail = model.tail
    rw = model.rewards
    tail_on_face = (
        tail is not None
        and rw.offset[0] == 0.0
        and rw.log_coef[0] == 0.0
        and abs(rw.slope[0] - endpoint) <= tol
    )
    if not keep.any() and not tail_on_face:
        return None
    head = np.where(keep, model.weights.head, 0.0)
    weights = WeightModel(head, tail if tail_on_face else None)
    return PinningModel(weights, model.rewards, None, model.name)


def _theta_model(model: PinningModel) -> Optional[PinningModel]:
    """Weights a(s) e^(-ell s) with rewards f(s) - r s: theta(k) is its G(k, 0)."""
    tail = model.tail
    if tail is None:
        return None
    r = np.asarray(model.r, dtype=float)
    s = np.arange(1, model.size + 1, dtype=float)
    head = model.weights.head * np.exp(-model.ell * s)
    weights = WeightModel(head, TailSpec(tail.amplitude, tail.power, 0.0, tail.shift))
    rw = model.rewards
    rewards = RewardSpec(rw.head - np.outer(s, r), np.zeros(model.dim), rw.offset, rw.log_coef)
    return PinningModel(weights, rewards, None, model.name)


@dataclass(frozen=True)
class _Edge:
    log_theta: float
    grad: np.ndarray  # gradient of log theta
    cov: np.ndarray  # its Hessian
    mean_s: float  # E[s] under the edge weights, possibly inf


class RateSolver:
    """Rate function of one model; caches z(0), the domain and the reduction."""

    def __init__(self, model: PinningModel):
        self.model = model
        self.z0 = z_value(model, np.zeros(model.dim))
        self.reduction = _reduction(model)
        self._inner: Optional[RateSolver] = None
        if self.reduction.dim < model.dim and self.reduction.model is not None:
            self._inner = RateSolver(self.reduction.model)
        self.domain = domain(model) if self.reduction.dim == model.dim else None
        self._tm = _theta_model(model) if model.dim > 1 else None

    # -- public -----------------------------------------------------------
    def rate(self, w) -> RateResult:
        w = np.atleast_1d(np.asarray(w, dtype=float))
        if w.shape != (self.model.dim,):
            raise ValueError(f"w has shape {w.shape}, model dimension is {self.model.dim}")
        red = self.reduction
        if red.dim < self.model.dim:
            wo = red.project(w)
            if wo is None:
                return RateResult(w, math.inf, "outside_domain")
            if red.dim == 0:
                if np.allclose(w, red.r, rtol=0, atol=1e-12 * (1 + np.linalg.norm(w))):
                    return RateResult(w, 0.0, "interior_newton", np.zeros_like(w))
                return RateResult(w, math.inf, "outside_domain")
            inner = self._inner.rate(wo)
            k = None if inner.dual_k is None else red.A_o.T @ inner.dual_k
            return RateResult(w, inner.value, inner.branch, k, inner.theta_residual)
        if self.model.dim == 1:
            return self._rate_1d(w)
        return self._rate_nd(w)

    def dual_value(self, w, k) -> float:
        """w.k - z(k) + z(0), a lower bound on I(w) for every k."""
        return float(np.dot(w, k)) - z_value(self.model, k) + self.z0

    # -- one dimension ----------------------------------------------------
    def _boundary_1d(self, w: np.ndarray, endpoint: float) -> RateResult:
        m = self.model
        face = _face_model(m, endpoint)
        z_face = -math.inf if face is None else z_value(face, np.zeros(1))
        if math.isfinite(m.ell) and abs(float(m.r[0]) - endpoint) <= 1e-14 * max(1.0, abs(endpoint)):
            z_face = max(z_face, m.ell)
        value = self.z0 - z_face
        branch = "at_r" if (m.r[0] == endpoint and math.isfinite(m.ell)) else "boundary_limit"
        return RateResult(w, max(value, 0.0), branch)

    @staticmethod
    def _subgrad(pt: FreeEnergyPoint) -> tuple[float, float]:
        sd = pt.subdiff
        if sd.is_point:
            v = float(sd.a[0])
            return v, v
        a, b = float(sd.a[0]), float(sd.b[0])
        return min(a, b), max(a, b)

    def _rate_1d(self, w: np.ndarray) -> RateResult:
        m, dom = self.model, self.domain
        x = float(w[0])
        if not dom.contains_closure(w):
            return RateResult(w, math.inf, "outside_domain")
        if dom.lower == dom.upper:
            return RateResult(w, 0.0, "interior_newton", np.zeros(1))
        if dom.on_boundary(w):
            end = dom.lower if abs(x - dom.lower) <= abs(x - dom.upper) else dom.upper
            return self._boundary_1d(w, end)

        tol = 1e-13 * (1.0 + abs(x))
        k, lo, hi = 0.0, -math.inf, math.inf
        pt = free_energy(m, [k])
        last_gap, bisect_next = math.inf, False
        for _ in range(MAX_ITER):
            gl, gu = self._subgrad(pt)
            if gl - tol <= x <= gu + tol:
                break
            if gu < x:
                lo = k
            else:
                hi = k
            gap = min(abs(x - gl), abs(x - gu))
            new = math.nan
            if not pt.in_theta and pt.hessian is not None and not bisect_next:
                J = float(pt.hessian[0, 0])
                if J > 0:
                    new = k + (x - float(pt.nu[0])) / J
            bisect_next = gap > 0.5 * last_gap
            last_gap = gap
            if not (lo < new < hi):
                if math.isfinite(lo) and math.isfinite(hi):
                    new = 0.5 * (lo + hi)
                elif math.isfinite(lo):
                    new = lo + max(1.0, abs(lo))
                else:
                    new = hi - max(1.0, abs(hi))
            if new == k or (math.isfinite(lo) and math.isfinite(hi) and hi - lo <= 4e-16 * max(1.0, abs(k))):
                break
            k = new
            pt = free_energy(m, [k], guess=pt.z if not pt.in_theta else None)
        else:
            raise ConvergenceError(f"dual search did not converge at w={x}", np.array([k]))

        if pt.in_theta and not pt.subdiff.is_point:
            k = self._polish_boundary(k)
            pt = free_energy(m, [k], with_hessian=False)
        value = x * k - pt.z + self.z0
        if pt.in_theta:
            on_r = abs(x - float(m.r[0])) <= tol
            branch = "at_r" if on_r else "segment"
        else:
            branch = "interior_newton"
        resid = abs(pt.theta - 1.0) if pt.in_theta else None
        return RateResult(w, max(value, 0.0), branch, np.array([k]), resid)

    def _polish_boundary(self, k: float) -> float:
        """Newton on log theta(k) = 0, to place k exactly on the edge of Theta."""
        m = self.model
        for _ in range(20):
            zeta = theta_base(m, [k])
            _, vals, _, _ = weighted_sums(m, [k], zeta, [((0,), 0), ((1,), 0), ((0,), 1)])
            if not np.all(np.isfinite(vals)) or vals[0] <= 0:
                break
            th = log_grand_sum(m, [k], zeta)
            slope = (vals[1] - float(m.r[0]) * vals[2]) / vals[0]
            if slope == 0 or abs(th) <= 1e-16:
                break
            step = th / slope
            if abs(step) > 1e-6 * (1.0 + abs(k)):
                break
            new = k - step
            if new == k:
                break
            k = new
        return k

    # -- several dimensions -----------------------------------------------
    def _grad(self, pt: FreeEnergyPoint, w: np.ndarray) -> np.ndarray:
        sd = pt.subdiff
        if sd.is_point:
            return w - sd.a
        # closest point of the segment to w
        d = sd.b - sd.a
        t = float(np.clip(np.dot(w - sd.a, d) / np.dot(d, d), 0.0, 1.0))
        return w - (sd.a + t * d)

    def _rate_nd(self, w: np.ndarray) -> RateResult:
        m, dom = self.model, self.domain
        if dom._hull is not None and not dom.contains_closure(w):
            return RateResult(w, math.inf, "outside_domain")
        if dom._hull is None:
            return self._dual_nd(w)
        if dom.on_boundary(w, 1e-14):
            return self._boundary_nd(w)
        try:
            return self._dual_nd(w)
        except ConvergenceError:
            # within sampling error of a face: take the radial limit
            if dom.on_boundary(w, 1e-9):
                return self._boundary_nd(w)
            raise

    def _dual_nd(self, w: np.ndarray) -> RateResult:
        m = self.model
        if self._tm is not None and np.linalg.norm(w - m.r) <= 1e-12 * (1.0 + np.linalg.norm(w)):
            return RateResult(w, max(self.z0 - m.ell, 0.0), "at_r")
        k, pt, done = self._newton_nd(w, np.zeros(m.dim))
        if done:
            return self._finish_nd(w, k, pt)
        edge, k_edge, normal = self._edge_optimum(w, k)
        if edge is not None:
            return edge
        if k_edge is not None:
            # the optimum lies just outside Theta: restart from the edge point
            step = 1e-3 / max(1.0, m.M) * normal / max(float(np.linalg.norm(normal)), 1e-300)
            k2, pt2, done = self._newton_nd(w, k_edge + step)
            if done:
                return self._finish_nd(w, k2, pt2)
            k = k2
        try:
            return self._bfgs_nd(w, k)
        except ConvergenceError as exc:
            if exc.last is None:
                raise
            edge, _, _ = self._edge_optimum(w, np.asarray(exc.last, dtype=float))
            if edge is None:
                raise
            return edge

    def _newton_nd(self, w: np.ndarray, k: np.ndarray):
        """Damped Newton off Theta; returns (k, point, converged)."""
        m = self.model
        tol = GRAD_TOL * (1.0 + np.linalg.norm(w))
        pt = free_energy(m, k)
        obj = float(w @ k) - pt.z
        for _ in range(MAX_ITER):
            g = self._grad(pt, w)
            if np.linalg.norm(g) <= tol:
                return k, pt, True
            if pt.in_theta or pt.hessian is None:
                break
            try:
                step = np.linalg.solve(pt.hessian, g)
            except np.linalg.LinAlgError:
                break
            if not np.all(np.isfinite(step)) or float(step @ g) <= 0:
                break
            # trust cap: keep k.f(s) within a few units per step
            cap = 4.0 / max(1.0, m.M)
            norm = float(np.linalg.norm(step))
            if norm > cap:
                step *= cap / norm
            t, inside = 1.0, 0
            for _ in range(60):
                k_new = k + t * step
                pt_new = free_energy(m, k_new, guess=pt.z)
                if pt_new.in_theta:
                    inside += 1
                    if inside > 10:
                        # pressed against Theta: the edge solver takes over
                        return k, pt, False
                    t *= 0.5
                    continue
                obj_new = float(w @ k_new) - pt_new.z
                if obj_new >= obj - 1e-15 * (1.0 + abs(obj)):
                    break
                t *= 0.5
            else:
                break
            if np.array_equal(k_new, k):
                break
            k, pt, obj = k_new, pt_new, obj_new
        return k, pt, False

    def _edge(self, k: np.ndarray) -> Optional[_Edge]:
        d = self.model.dim
        eye = np.eye(d, dtype=int)
        pairs = [(i, j) for i in range(d) for j in range(i, d)]
        specs = [((0,) * d, 0), ((0,) * d, 1)]
        specs += [(tuple(eye[i]), 0) for i in range(d)]
        specs += [(tuple(eye[i] + eye[j]), 0) for i, j in pairs]
        _, v, _, _ = weighted_sums(self._tm, k, 0.0, specs)
        if not math.isfinite(v[0]) or v[0] <= 0:
            return None
        first = v[2 : 2 + d] / v[0]
        second = np.empty((d, d))
        for (i, j), x in zip(pairs, v[2 + d :]):
            second[i, j] = second[j, i] = x / v[0]
        if not (np.all(np.isfinite(first)) and np.all(np.isfinite(second))):
            return None
        log_theta = log_grand_sum(self._tm, k, 0.0)
        return _Edge(log_theta, first, second - np.outer(first, first), v[1] / v[0])

    def _edge_optimum(self, w: np.ndarray, k0: np.ndarray) -> tuple:
        """Maximizer on the edge of Theta, if the dual optimum sits there.

        Solves  max (w - r).k  subject to  log theta(k) = 0  by Newton on the
        KKT system  mu grad log theta = w - r.  The edge point is optimal
        exactly when mu E[s] <= 1, i.e. when w lies on the segment from r
        to nu(k).  Returns ``(result or None, edge point or None, normal)``.
        """
        none = (None, None, None)
        if self._tm is None:
            return none
        m, d = self.model, self.model.dim
        u = w - np.asarray(m.r, dtype=float)
        e = self._edge(k0)
        if e is None:
            return none
        k = np.array(k0, dtype=float)
        gg = float(e.grad @ e.grad)
        mu = max(float(u @ e.grad) / gg if gg > 0 else 0.0, 1e-3)

        def residual(e, mu):
            return np.concatenate([mu * e.grad - u, [e.log_theta]])

        F = residual(e, mu)
        scale = 1.0 + float(np.linalg.norm(u))
        for _ in range(MAX_ITER):
            if np.linalg.norm(F) <= 1e-14 * scale:
                break
            J = np.zeros((d + 1, d + 1))
            J[:d, :d] = mu * e.cov
            J[:d, d] = e.grad
            J[d, :d] = e.grad
            try:
                step = np.linalg.solve(J, -F)
            except np.linalg.LinAlgError:
                return none
            if not np.all(np.isfinite(step)):
                return none
            t, base = 1.0, float(np.linalg.norm(F))
            for _ in range(50):
                k_new, mu_new = k + t * step[:d], mu + t * step[d]
                e_new = self._edge(k_new)
                if e_new is not None:
                    F_new = residual(e_new, mu_new)
                    if np.linalg.norm(F_new) < (1.0 - 1e-4 * t) * base:
                        break
                t *= 0.5
            else:
                break
            k, mu, e, F = k_new, mu_new, e_new, F_new
        if np.linalg.norm(F) > 1e-10 * scale or mu < 0:
            return none
        if mu * e.mean_s > 1.0 + 1e-9:
            return None, k, e.grad
        value = float(u @ k) - m.ell + self.z0
        res = RateResult(w, max(value, 0.0), "segment", k, abs(math.expm1(e.log_theta)))
        return res, k, e.grad

    def _bfgs_nd(self, w: np.ndarray, k0: np.ndarray) -> RateResult:
        m = self.model
        cache: dict = {}

        def point(k):
            key = tuple(np.asarray(k, dtype=float).tolist())
            if key not in cache:
                cache[key] = free_energy(m, np.asarray(k, dtype=float), with_hessian=False)
            return cache[key]

        def fun(k):
            pt = point(k)
            return pt.z - float(w @ k), -self._grad(pt, w)

        res = optimize.minimize(fun, k0, jac=True, method="BFGS",
                                options={"gtol": 1e-11, "maxiter": MAX_ITER})
        k = np.asarray(res.x, dtype=float)
        pt = free_energy(m, k)
        g = self._grad(pt, w)
        if np.linalg.norm(g) > 1e-7 * (1.0 + np.linalg.norm(w)):
            raise ConvergenceError(
                f"dual maximization stalled with gradient norm {np.linalg.norm(g):.3g}", k
            )
        return self._finish_nd(w, k, pt)

    def _finish_nd(self, w, k, pt: FreeEnergyPoint) -> RateResult:
        value = float(w @ k) - pt.z + self.z0
        if pt.in_theta:
            on_r = np.linalg.norm(w - self.model.r) <= 1e-9 * (1.0 + np.linalg.norm(w))
            branch = "at_r" if on_r else "segment"
            return RateResult(w, max(value, 0.0), branch, k, abs(pt.theta - 1.0))
        return RateResult(w, max(value, 0.0), "interior_newton", k)

    def _boundary_nd(self, w: np.ndarray) -> RateResult:
        """Radial limit toward an interior anchor, Richardson-extrapolated."""
        u = np.mean(self.domain.points, axis=0)
        vals = []
        for j in range(1, 13):
            lam = 1.0 - 2.0 ** (-j)
            vals.append(self._dual_nd(lam * w + (1 - lam) * u).value)
        table = [vals]
        for level in range(1, 4):
            prev = table[-1]
            fac = 2.0**level
            table.append([(fac * prev[i + 1] - prev[i]) / (fac - 1) for i in range(len(prev) - 1)])
        return RateResult(w, max(table[-1][-1], 0.0), "boundary_limit")


def rate_at(model: PinningModel, w) -> RateResult:
    return RateSolver(model).rate(w)


def rate_curve(model: PinningModel, ws: Sequence) -> list:
    solver = RateSolver(model)
    return [solver.rate(w) for w in ws]


# ---------------------------------------------------------------------------
# the N_t suite: f = 1 and a constant potential beta


def _p_model(model: PinningModel) -> tuple[PinningModel, float]:
    """The f = 1 model of the bare law p and the constant potential beta."""
    if model.dim != 1:
        raise NotApplicable("the counting suite needs a scalar reward")
    rw = model.rewards
    if not (np.all(rw.head == 1.0) and rw.slope[0] == 0 and rw.offset[0] == 1.0 and rw.log_coef[0] == 0):
        raise NotApplicable("the counting suite needs f(s) = 1")
    if model.base is not None:
        b = model.base
        if not (np.all(b.v_head == b.v_tail)):
            raise NotApplicable("the counting suite needs a constant potential")
        p, beta = b.p, float(b.v_tail)
    else:
        p, beta = model.weights, 0.0
    if p.tail is None or np.any(p.head <= 0):
        raise NotApplicable("the counting suite needs p(s) > 0 for every s")
    return PinningModel(p, RewardSpec.constant(p.size, 1.0)), beta


@dataclass(frozen=True)
class NtSuite:
    """Closed forms for the number of renewals N_t under v = beta."""

    p_model: PinningModel
    beta: float
    beta_c: float
    w_c: float
    ell: float
    z0: float
    rho: float

    @property
    def label(self) -> str:
        if self.beta_c == -math.inf:
            return "none"
        return "continuous" if self.w_c == 0.0 else "discontinuous"

    @property
    def regime(self) -> str:
        return _regime(self.beta, self.beta_c)

    def V(self, zeta: float) -> float:
        """sum e^(-zeta s) p / sum s e^(-zeta s) p, increasing on zeta > ell."""
        if zeta == self.ell:
            return self.w_c
        G0 = grand_sum(self.p_model, [0.0], zeta).value
        G1 = grand_moment(self.p_model, [0.0], zeta, n=1).value
        return G0 / G1

    def _solve_V(self, w: float) -> float:
        f = lambda z: self.V(z) - w  # noqa: E731
        lo = self.ell
        step = 1.0
        hi = lo + step
        while f(hi) < 0:
            lo, step = hi, 2 * step
            hi = hi + step
        return optimize.brentq(f, lo, hi, xtol=1e-15, rtol=1e-15, maxiter=500)

    def rate(self, w: float) -> float:
        if w < 0 or w > 1:
            return math.inf
        if w == 1:
            return -self.beta - math.log(self.p_model.weights.head[0]) + self.z0
        if w <= self.w_c:
            slope = 0.0 if self.regime in ("analytic", "at") else self.beta_c - self.beta
            return w * slope - self.ell + self.z0
        zeta = self._solve_V(w)
        return -w * (self.beta + log_grand_sum(self.p_model, [0.0], zeta)) - zeta + self.z0

    def as_dict(self) -> dict:
        return {
            "beta": self.beta,
            "beta_c": self.beta_c,
            "w_c": self.w_c,
            "rho": self.rho,
            "z0": self.z0,
            "label": self.label,
        }


def _regime(beta: float, beta_c: float) -> str:
    """Position of beta relative to beta_c; ties within the theta tolerance count as equal."""
    if beta_c == -math.inf:
        return "analytic"
    if abs(beta - beta_c) <= BOUNDARY_TOL:
        return "at"
    return "below" if beta < beta_c else "above"


def nt_suite(model: PinningModel, beta: Optional[float] = None) -> NtSuite:
    """beta_c, w_c, rho_beta and the rate of N_t/t in closed form."""
    P, beta0 = _p_model(model)
    beta = beta0 if beta is None else float(beta)
    ell = P.ell
    S0 = grand_sum(P, [0.0], ell).value
    if math.isfinite(S0):
        beta_c = -math.log(S0)
        S1 = grand_moment(P, [0.0], ell, n=1).value
        w_c = S0 / S1 if math.isfinite(S1) else 0.0
    else:
        beta_c, w_c = -math.inf, 0.0
    regime = _regime(beta, beta_c)
    z0 = ell if regime in ("below", "at") else z_value(P, [beta])
    suite = NtSuite(P, beta, beta_c, float(w_c), ell, float(z0), math.nan)
    rho = {"below": 0.0, "at": w_c}.get(regime)
    if rho is None:
        rho = suite.V(z0)
    return NtSuite(P, beta, beta_c, float(w_c), ell, float(z0), float(rho))


@dataclass(frozen=True)
class PhaseDiagram:
    beta_c: float
    w_c: float
    label: str
    rows: list  # (beta, rho, z0, regime)


def phase_diagram(model: PinningModel, betas: Sequence[float]) -> PhaseDiagram:
    rows = []
    base = nt_suite(model)
    for b in betas:
        s = nt_suite(model, b)
        rows.append((float(b), s.rho, s.z0, s.regime))
    return PhaseDiagram(base.beta_c, base.w_c, base.label, rows)
