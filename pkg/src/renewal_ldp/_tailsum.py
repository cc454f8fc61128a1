"""Certified sums of ``u**(-mu) * log(u)**b * exp(-lam*u)`` over ``u >= start``.

Every tail series in the package (weights ``A u^-gamma e^(ell s)`` times
rewards polynomial in ``s`` and ``log u``) reduces to this primitive.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from scipy import integrate, special

# Direct summation budget before switching to Euler-Maclaurin.
DIRECT_CAP = 1 << 16
_FIRST_CHUNK = 256
_REL_STOP = 1e-17


def _log_terms(u: np.ndarray, mu: float, b: int, lam: float) -> np.ndarray:
    logu = np.log(u)
    out = -mu * logu - lam * u
    if b:
        with np.errstate(divide="ignore"):
            out = out + b * np.log(logu)
    return out


def _em_remainder(M: float, mu: float, b: int, lam: float) -> tuple[float, float]:
    """Euler-Maclaurin estimate of sum_{u >= M} h(u), with an error bound."""
    L = math.log(M)
    logh = -mu * L - lam * M + (b * math.log(L) if b else 0.0)
    h = math.exp(logh)
    g1 = -mu / M - lam + (b / (M * L) if b else 0.0)
    g2 = mu / M**2 - (b * (L + 1) / (M * L) ** 2 if b else 0.0)
    g3 = -2 * mu / M**3 + (b * (2 * L * L + 3 * L + 2) / (M**3 * L**3) if b else 0.0)
    d1 = h * g1
    d3 = h * (g1**3 + 3 * g1 * g2 + g3)

    integral, ierr = _integral(M, mu, b, lam)
    value = integral + 0.5 * h - d1 / 12.0 + d3 / 720.0
    err = ierr + abs(d3) / 720.0 * (abs(g1) + 1.0 / M) ** 2 + 1e-16 * abs(value)
    return value, err


def _integral(M: float, mu: float, b: int, lam: float) -> tuple[float, float]:
    """int_M^inf u^-mu (log u)^b e^(-lam u) du."""
    L = math.log(M)
    if lam == 0.0:
        # substitute v = log u: int_L^inf v^b e^{-(mu-1) v} dv
        a = mu - 1.0
        val = special.gammaincc(b + 1, a * L) * special.gamma(b + 1) / a ** (b + 1)
        return float(val), 1e-15 * abs(float(val))

    # v = log(u / M); the integrand is smooth and decays at least like
    # exp(-lam M e^v), so split where that factor kicks in.
    scale = M ** (1.0 - mu)

    def f(v):
        return math.exp((1.0 - mu) * v - lam * M * (math.exp(v) - 1.0)) * (L + v) ** b

    pref = scale * math.exp(-lam * M)
    knee = max(0.0, math.log(max(1.0, 1.0 / (lam * M)))) + 1.0
    v_end = knee + math.log(1.0 + 800.0 / max(lam * M, 1e-300)) + 5.0
    total, err = 0.0, 0.0
    pts = np.linspace(0.0, v_end, 9)
    for a_, b_ in zip(pts[:-1], pts[1:]):
        val, e = integrate.quad(f, a_, b_, epsabs=0.0, epsrel=1e-13, limit=200)
        total += val
        err += e
    return pref * total, pref * err + 1e-15 * pref * abs(total)


@lru_cache(maxsize=65536)
def power_tail_sum(mu: float, b: int, lam: float, start: int, normalized: bool = False) -> tuple[float, float, int]:
    """Return ``(value, abs_error, terms_used)`` for the tail series.

    ``lam >= 0`` is ``-log x``.  Returns ``inf`` when the series diverges,
    which for ``lam == 0`` happens exactly when ``mu <= 1``.  With
    ``normalized`` the sum is divided by ``start**-mu * exp(-lam*start)``,
    which keeps it representable when that factor under- or overflows.
    """
    if lam < 0.0:
        return math.inf, 0.0, 0
    if lam == 0.0 and mu <= 1.0:
        return math.inf, 0.0, 0
    start = max(int(start), 1)
    shift = mu * math.log(start) + lam * start if normalized else 0.0

    total = 0.0
    used = 0
    chunk = _FIRST_CHUNK
    u0 = start
    while used < DIRECT_CAP:
        n = min(chunk, DIRECT_CAP - used)
        u = np.arange(u0, u0 + n, dtype=float)
        lt = _log_terms(u, mu, b, lam) + shift
        total += float(np.exp(lt).sum())
        used += n
        u0 += n
        # ratio bound for all later terms: each factor is decreasing in u
        K = float(u0)
        q = math.exp(-lam) * (1.0 + 1.0 / K) ** max(-mu, 0.0)
        if b:
            q *= (1.0 + 1.0 / (K * math.log(K))) ** b
        if q < 1.0:
            nxt = math.exp(_log_terms(np.array([K]), mu, b, lam)[0] + shift)
            rest = nxt / (1.0 - q)
            if rest <= _REL_STOP * max(abs(total), 1e-300) or rest < 1e-300:
                return total, rest + 1e-16 * abs(total) * math.sqrt(used), used
        chunk *= 2

    rem, err = _em_remainder(float(u0), mu, b, lam)
    if shift:
        f = math.exp(min(shift, 700.0))
        rem, err = rem * f, err * f
    total += rem
    return total, err + 1e-16 * abs(total) * math.sqrt(used), used
