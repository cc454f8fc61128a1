"""Self-checks for a single model, used by ``renewal-ldp verify``."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import exact
from .freeenergy import free_energy, z_value
from .model import PinningModel, validate
from .rate import RateSolver


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def _tilts(model: PinningModel, rng: np.random.Generator, n: int) -> list:
    # keep tilts moderate so k.f stays well inside double range
    span = 2.0 / max(1.0, model.M)
    return [rng.uniform(-span, span, model.dim) for _ in range(n)]


def _check(name: str, fn: Callable[[], tuple]) -> CheckResult:
    try:
        ok, detail = fn()
    except Exception as exc:  # a crash is a failed check, not a crashed run
        return CheckResult(name, False, f"{type(exc).__name__}: {exc}")
    return CheckResult(name, bool(ok), detail)


def run_checks(model: PinningModel, tol: float = 1e-9, seed: int = 0, cases: int = 12) -> list:
    rng = np.random.default_rng(seed)
    ks = _tilts(model, rng, cases)
    z0 = z_value(model, np.zeros(model.dim))
    solver = RateSolver(model)
    out = []

    def valid():
        rep = validate(model)
        return rep.passed, "; ".join(rep.violations) or "ok"

    def convex_z():
        worst = math.inf
        for k1, k2 in zip(ks, ks[1:]):
            gap = 0.5 * (z_value(model, k1) + z_value(model, k2)) - z_value(model, 0.5 * (k1 + k2))
            worst = min(worst, gap)
        return worst >= -tol, f"min midpoint gap {worst:.3g}"

    def gradient():
        worst, h = 0.0, 1e-5
        for k in ks:
            pt = free_energy(model, k)
            if pt.in_theta:
                continue
            fd = np.array([
                (z_value(model, k + h * e) - z_value(model, k - h * e)) / (2 * h)
                for e in np.eye(model.dim)
            ])
            worst = max(worst, float(np.max(np.abs(fd - pt.nu))) / (1 + np.linalg.norm(pt.nu)))
        return worst <= 1e-5, f"max relative gap {worst:.3g}"

    def psd():
        worst = math.inf
        for k in ks:
            pt = free_energy(model, k)
            if pt.hessian is not None:
                ev = np.linalg.eigvalsh(0.5 * (pt.hessian + pt.hessian.T))
                worst = min(worst, float(ev[0]) / (1 + float(np.max(np.abs(ev)))))
        return worst >= -tol, f"min scaled eigenvalue {worst:.3g}"

    def closure():
        worst = 0.0
        for k in ks:
            pt = free_energy(model, k, with_hessian=False)
            if pt.in_theta or pt.nu is None:
                continue
            lhs = solver.rate(pt.nu).value + pt.z - z0
            worst = max(worst, abs(lhs - float(pt.nu @ k)) / (1 + abs(pt.z)))
        return worst <= 1e-7, f"max relative gap {worst:.3g}"

    def fenchel_young():
        worst = math.inf
        for k in ks:
            pt = free_energy(model, k, with_hessian=False)
            w = pt.nu if pt.nu is not None else np.array(model.r)
            w = w + rng.normal(0.0, 0.1, model.dim)
            val = solver.rate(w).value
            if math.isinf(val):
                continue
            worst = min(worst, val + pt.z - z0 - float(w @ k))
        return worst >= -1e-8, f"min slack {worst:.3g}"

    def triangle():
        t = 10
        en = exact.enumerate_marginal(model, t)
        zc = exact.zc_table(model, t).zc(t)
        rel = abs(en.zc - zc) / zc if zc > 0 else abs(en.zc)
        detail = f"enumeration vs recursion {rel:.3g}"
        ok = rel <= 1e-12
        if model.dim == 1:
            try:
                dist = exact.dist_W(model, t)
            except exact.OracleNotApplicable:
                return ok, detail + "; non-integer rewards, dp skipped"
            hist = en.w_histogram()
            gap = max(abs(hist.get(float(v), 0.0) - p) for v, p in zip(dist.values, dist.prob))
            ok = ok and gap <= 1e-12
            detail += f"; enumeration vs dp {gap:.3g}"
        return ok, detail

    def kingman():
        if model.base is None:
            return True, "no base law, skipped"
        pairs = [(int(a), int(a) + int(b)) for a, b in rng.integers(1, 12, size=(8, 2))]
        err = exact.kingman_check(model.base, pairs)
        return err <= 1e-12, f"max error {err:.3g}"

    for name, fn in [
        ("validate", valid),
        ("z_midpoint_convexity", convex_z),
        ("nu_vs_finite_difference", gradient),
        ("hessian_psd", psd),
        ("duality_closure", closure),
        ("fenchel_young", fenchel_young),
        ("consistency_triangle", triangle),
        ("kingman_factorization", kingman),
    ]:
        out.append(_check(name, fn))
    return out
