"""Free energy z(k), its gradient nu(k), Hessian J(k) and subdifferential."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .model import PinningModel
from .series import BOUNDARY_TOL, SeriesValue, _as_k, theta, theta_base, weighted_sums

RESIDUAL_TOL = 1e-10


class ConvergenceError(RuntimeError):
    """Numerical iteration failed; ``last`` holds the final iterate."""

    def __init__(self, message: str, last=None):
        super().__init__(message)
        self.last = last


class MomentDivergence(ArithmeticError):
    """The first moment series diverges at the requested tilt."""


@dataclass(frozen=True)
class Subdifferential:
    """Either a point ``{a}`` or the closed segment ``[a, b]``."""

    kind: str  # "point" or "segment"
    a: np.ndarray
    b: Optional[np.ndarray] = None

    @property
    def is_point(self) -> bool:
        return self.kind == "point"

    def contains(self, w, tol: float = 1e-9) -> bool:
        w = np.asarray(w, dtype=float)
        if self.is_point:
            return bool(np.linalg.norm(w - self.a) <= tol * (1 + np.linalg.norm(self.a)))
        d = self.b - self.a
        t = float(np.clip(np.dot(w - self.a, d) / np.dot(d, d), 0.0, 1.0))
        return bool(np.linalg.norm(w - self.a - t * d) <= tol * (1 + np.linalg.norm(self.b)))

    def as_dict(self) -> dict:
        out = {"kind": self.kind, "a": self.a.tolist()}
        if self.b is not None:
            out["b"] = self.b.tolist()
        return out


@dataclass(frozen=True)
class FreeEnergyPoint:
    k: np.ndarray
    z: float
    in_theta: bool
    theta: float
    nu: Optional[np.ndarray]
    hessian: Optional[np.ndarray]
    subdiff: Subdifferential

    @property
    def on_boundary(self) -> bool:
        return self.in_theta and abs(self.theta - 1.0) <= BOUNDARY_TOL


def _log_g_and_slope(model: PinningModel, k: np.ndarray, zeta: float) -> tuple[float, float]:
    """log G(k, zeta) and -d/dzeta log G = (sum s c) / (sum c)."""
    d = model.dim
    scale, vals, _, _ = weighted_sums(model, k, zeta, [((0,) * d, 0), ((0,) * d, 1)])
    if math.isinf(vals[0]):
        return math.inf, math.inf
    if vals[0] <= 0:
        return -math.inf, math.inf
    return scale + math.log(vals[0]), vals[1] / vals[0]


def _residual(phi: float) -> float:
    return abs(math.expm1(phi)) if phi < 700 else math.inf


def _solve_root(model: PinningModel, k: np.ndarray, lo: float, guess: Optional[float] = None) -> float:
    """Root of G(k, zeta) = 1 with zeta > lo (``lo`` may be -inf).

    log G is convex and decreasing in zeta, so Newton steps taken from the
    left of the root never overshoot; steps that leave the bracket fall
    back to bisection.
    """
    hi = model.weights.z_o + model.M * float(np.linalg.norm(k)) + math.log(2.0)
    for _ in range(60):
        phi_hi, slope_hi = _log_g_and_slope(model, k, hi)
        if phi_hi <= 0:
            break
        hi += max(1.0, abs(hi))
    else:
        raise ConvergenceError("no upper bracket for the free-energy root", hi)

    zeta, phi, slope = hi, phi_hi, slope_hi
    if guess is not None and lo < guess < hi:
        g_phi, g_slope = _log_g_and_slope(model, k, guess)
        if math.isfinite(g_phi):
            zeta, phi, slope = guess, g_phi, g_slope
    for _ in range(200):
        if phi > 0:
            lo = zeta
        else:
            hi = zeta
        if _residual(phi) <= 1e-15:
            return zeta
        new = zeta + phi / slope if math.isfinite(phi) and slope > 0 else math.nan
        if not (new > lo and new < hi):
            if math.isfinite(lo):
                new = 0.5 * (lo + hi)
            else:
                new = hi - 2.0 * max(1.0, hi - zeta, abs(hi))
        if new == zeta or (math.isfinite(lo) and hi - lo <= 4e-16 * max(1.0, abs(hi))):
            break
        zeta = new
        phi, slope = _log_g_and_slope(model, k, zeta)
    phi, _ = _log_g_and_slope(model, k, zeta)
    if math.isfinite(lo) and hi - lo <= 4e-16 * max(1.0, abs(hi)):
        # bracket at double resolution: G may be steep or Holder at the
        # edge, so the residual cannot shrink further
        return zeta if math.isfinite(phi) else hi
    if not _residual(phi) <= RESIDUAL_TOL:
        raise ConvergenceError(f"free-energy root residual {_residual(phi):.3g}", zeta)
    return zeta


def z_value(model: PinningModel, k) -> float:
    """z(k) alone, without the derivative bundle."""
    k = _as_k(model, k)
    th = theta(model, k)
    if th.value <= 1.0 + BOUNDARY_TOL:
        return theta_base(model, k)
    lo = theta_base(model, k) if math.isfinite(model.ell) else -math.inf
    return _solve_root(model, k, lo)


def _moments(model: PinningModel, k: np.ndarray, zeta: float, second: bool):
    """Moments of c(s) = exp(k.f) a(s) exp(-zeta s), scaled by a common factor."""
    d = model.dim
    eye = np.eye(d, dtype=int)
    zero = (0,) * d
    specs = [(zero, 0), (zero, 1)] + [(tuple(eye[i]), 0) for i in range(d)]
    if second:
        specs += [(zero, 2)] + [(tuple(eye[i]), 1) for i in range(d)]
        specs += [(tuple(eye[i] + eye[j]), 0) for i in range(d) for j in range(i, d)]
    _, vals, _, _ = weighted_sums(model, k, zeta, specs)
    return vals


def _nu_hessian(model: PinningModel, k: np.ndarray, zeta: float, second: bool):
    d = model.dim
    vals = _moments(model, k, zeta, second)
    m0, m_s = vals[0], vals[1]
    m_f = vals[2 : 2 + d]
    if not (math.isfinite(m_s) and np.all(np.isfinite(m_f))):
        raise MomentDivergence("first moment diverges")
    nu = m_f / m_s
    if not second:
        return nu, None
    m_ss = vals[2 + d]
    m_fs = vals[3 + d : 3 + 2 * d]
    m_ff = np.empty((d, d))
    pos = 3 + 2 * d
    for i in range(d):
        for j in range(i, d):
            m_ff[i, j] = m_ff[j, i] = vals[pos]
            pos += 1
    J = (m_ff - np.outer(m_fs, nu) - np.outer(nu, m_fs) + np.outer(nu, nu) * m_ss) / m_s
    J = 0.5 * (J + J.T)
    return nu, J


def free_energy(model: PinningModel, k, *, with_hessian: bool = True, guess: Optional[float] = None) -> FreeEnergyPoint:
    """z(k) with its derivative data; ``guess`` warm-starts the root solve."""
    k = _as_k(model, k)
    th: SeriesValue = theta(model, k)
    r = np.array(model.r)
    if th.value <= 1.0 + BOUNDARY_TOL:
        z = theta_base(model, k)
        nu = None
        if abs(th.value - 1.0) <= BOUNDARY_TOL:
            try:
                nu, _ = _nu_hessian(model, k, z, False)
            except MomentDivergence:
                nu = None
        if nu is None:
            sub = Subdifferential("point", r)
        else:
            sub = Subdifferential("segment", r, nu)
        return FreeEnergyPoint(k, float(z), True, float(th.value), nu, None, sub)

    lo = theta_base(model, k) if math.isfinite(model.ell) else -math.inf
    z = _solve_root(model, k, lo, guess)
    nu, J = _nu_hessian(model, k, z, with_hessian)
    return FreeEnergyPoint(k, float(z), False, float(th.value), nu, J, Subdifferential("point", nu))


def nu(model: PinningModel, k) -> np.ndarray:
    """Gradient of z off the boundary set; raises MomentDivergence if undefined."""
    pt = free_energy(model, k, with_hessian=False)
    if pt.nu is None:
        raise MomentDivergence("first moment diverges at this tilt")
    return pt.nu


def hessian(model: PinningModel, k) -> np.ndarray:
    pt = free_energy(model, k)
    if pt.hessian is None:
        raise MomentDivergence("z is not twice differentiable on the boundary set")
    return pt.hessian


def subdifferential(model: PinningModel, k) -> Subdifferential:
    return free_energy(model, k, with_hessian=False).subdiff


@dataclass(frozen=True)
class CriticalityReport:
    is_critical: bool
    rho: np.ndarray
    segment: Optional[tuple]
    theta0: float
    z0: float

    def as_dict(self) -> dict:
        return {
            "is_critical": self.is_critical,
            "rho": self.rho.tolist(),
            "segment": None if self.segment is None else [s.tolist() for s in self.segment],
            "theta0": self.theta0,
            "z0": self.z0,
        }


def criticality(model: PinningModel) -> CriticalityReport:
    """Critical means ell finite, theta(0) = 1 and a finite tilted first moment."""
    pt = free_energy(model, np.zeros(model.dim), with_hessian=False)
    critical = bool(
        math.isfinite(model.ell) and pt.on_boundary and pt.nu is not None
    )
    if pt.in_theta and pt.subdiff.is_point:
        rho = np.array(model.r)
    else:
        rho = pt.nu
    segment = (pt.subdiff.a, pt.subdiff.b) if critical else None
    return CriticalityReport(critical, rho, segment, pt.theta, pt.z)
