"""Tilted weight series ``G(k, zeta) = sum_s exp(k.f(s)) a(s) exp(-zeta s)``.

Head terms are summed directly.  Tail terms expand into monomials
``u^a log(u)^b`` (``u = s - shift``) times ``u^(k.kappa1 - gamma) exp(-lam u)``,
each summed by :func:`renewal_ldp._tailsum.power_tail_sum` with a certified
error.  Divergence is decided from the exponents, never from partial sums.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from ._tailsum import power_tail_sum
from .model import PinningModel

BOUNDARY_TOL = 1e-10


class SeriesDomainError(ValueError):
    pass


@dataclass(frozen=True)
class SeriesValue:
    value: float
    abs_error: float
    terms_used: int

    @property
    def finite(self) -> bool:
        return math.isfinite(self.value)

    def __float__(self) -> float:
        return float(self.value)


def polylog(order: float, x: float) -> SeriesValue:
    """Li_order(x) = sum_{s>=1} s^-order x^s for real order and x in [0, 1]."""
    if not (0.0 <= x <= 1.0):
        raise SeriesDomainError(f"polylog argument {x} outside [0, 1]")
    if x == 0.0:
        return SeriesValue(0.0, 0.0, 0)
    val, err, n = power_tail_sum(float(order), 0, -math.log(x), 1)
    return SeriesValue(val, err, n)


def _poly_mul(p: dict, q: dict) -> dict:
    out: dict = {}
    for (a1, b1), c1 in p.items():
        for (a2, b2), c2 in q.items():
            key = (a1 + a2, b1 + b2)
            out[key] = out.get(key, 0.0) + c1 * c2
    return {k: v for k, v in out.items() if v != 0.0}


def _tail_polynomial(model: PinningModel, m: Sequence[int], n: int) -> dict:
    """prod_i f_i(s)^m_i * s^n on the tail, as {(power of u, power of log u): coef}."""
    h = model.shift
    rw = model.rewards
    poly = {(0, 0): 1.0}
    s_poly = {k: v for k, v in {(1, 0): 1.0, (0, 0): float(h)}.items() if v}
    for _ in range(n):
        poly = _poly_mul(poly, s_poly)
    for i, mi in enumerate(m):
        fi = {(1, 0): rw.slope[i], (0, 0): rw.slope[i] * h + rw.offset[i], (0, 1): rw.log_coef[i]}
        fi = {k: float(v) for k, v in fi.items() if v != 0.0}
        for _ in range(mi):
            poly = _poly_mul(poly, fi)
    return poly


def _as_k(model: PinningModel, k) -> np.ndarray:
    k = np.atleast_1d(np.asarray(k, dtype=float))
    if k.shape != (model.dim,):
        raise SeriesDomainError(f"tilt has shape {k.shape}, model dimension is {model.dim}")
    return k


def theta_base(model: PinningModel, k) -> float:
    """k.r + ell, the left end of the convergence region in zeta."""
    k = _as_k(model, k)
    return float(np.dot(k, model.r)) + model.ell


def weighted_sums(model: PinningModel, k, zeta: float, specs: Iterable[tuple]):
    """Scaled sums for a batch of (m multi-index, n) moment specs.

    Returns ``(log_scale, values, errors, terms_used)`` where the true sums
    are ``exp(log_scale) * values``.  Divergent entries are ``inf``.
    """
    k = _as_k(model, k)
    specs = [(tuple(int(x) for x in m), int(n)) for m, n in specs]
    w = model.weights
    sup = w.support_head
    s = sup.astype(float)
    F = model.rewards.head[sup - 1]
    logc = F @ k + np.log(w.head[sup - 1]) - zeta * s

    tail = w.tail
    lam = None
    if tail is not None:
        lam = zeta - theta_base(model, k)
        h = tail.shift
        start = w.size + 1 - h
        mu0 = tail.power - float(np.dot(k, model.rewards.log_coef))
        log_pref = math.log(tail.amplitude) + float(np.dot(k, model.rewards.offset)) - lam * h
        lead = log_pref - mu0 * math.log(start) - max(lam, 0.0) * start

    cands = [float(np.max(logc))] if len(logc) else []
    if tail is not None:
        cands.append(lead)
    scale = max(cands)
    if not math.isfinite(scale):
        scale = 0.0
    ch = np.exp(logc - scale)

    values = np.empty(len(specs))
    errors = np.zeros(len(specs))
    used = len(sup)
    for j, (m, n) in enumerate(specs):
        mono = np.prod(F ** np.array(m, dtype=float), axis=1) * s**n if len(m) else s**n
        val = float(np.sum(mono * ch))
        err = 1e-16 * float(np.sum(np.abs(mono * ch))) * math.sqrt(max(len(sup), 1))
        if tail is not None:
            poly = _tail_polynomial(model, m, n)
            if lam < 0:
                val, err = math.inf, 0.0
            else:
                for (a, b), coef in poly.items():
                    # normalized sums keep exp(lead - scale) <= 1 out of harm's way
                    mu_a = float(mu0 - a)
                    factor = math.exp(log_pref - mu_a * math.log(start) - lam * start - scale)
                    tv, te, nt = power_tail_sum(mu_a, int(b), float(lam), int(start), True)
                    used = max(used, len(sup) + nt)
                    if math.isinf(tv):
                        val, err = math.inf, 0.0
                        break
                    val += factor * coef * tv
                    err += factor * abs(coef) * te
        values[j] = val
        errors[j] = err
    return scale, values, errors, used


def _unscale(scale: float, value: float, err: float, used: int) -> SeriesValue:
    if math.isinf(value):
        return SeriesValue(math.inf, 0.0, used)
    with np.errstate(over="ignore"):
        f = math.exp(scale) if scale < 709 else math.inf
    if math.isinf(f):
        return SeriesValue(math.inf if value > 0 else -math.inf, 0.0, used)
    return SeriesValue(value * f, err * f, used)


def grand_sum(model: PinningModel, k, zeta: float) -> SeriesValue:
    """G(k, zeta); ``+inf`` exactly when the tail exponents force divergence."""
    scale, vals, errs, used = weighted_sums(model, k, zeta, [((), 0)])
    return _unscale(scale, vals[0], errs[0], used)


def log_grand_sum(model: PinningModel, k, zeta: float) -> float:
    scale, vals, _, _ = weighted_sums(model, k, zeta, [((), 0)])
    if vals[0] <= 0:
        return -math.inf
    return scale + math.log(vals[0])


def grand_moment(model: PinningModel, k, zeta: float, m: Sequence[int] = (), n: int = 0) -> SeriesValue:
    """sum_s prod_i f_i(s)^m_i s^n exp(k.f(s)) a(s) exp(-zeta s)."""
    m = tuple(m) or (0,) * model.dim
    if len(m) != model.dim:
        raise SeriesDomainError("multi-index length must equal the reward dimension")
    if any(x < 0 for x in m) or n < 0:
        raise SeriesDomainError("moment orders must be non-negative")
    scale, vals, errs, used = weighted_sums(model, k, zeta, [(m, n)])
    return _unscale(scale, vals[0], errs[0], used)


def theta(model: PinningModel, k) -> SeriesValue:
    """G at the convergence edge zeta = k.r + ell (``+inf`` for finite support)."""
    if model.ell == -math.inf:
        return SeriesValue(math.inf, 0.0, 0)
    return grand_sum(model, k, theta_base(model, k))


def in_theta(model: PinningModel, k) -> bool:
    return theta(model, k).value <= 1.0 + BOUNDARY_TOL
