"""Exact finite-t oracles for the constrained model.

All tables are kept in a rescaled linear domain: with a scale ``lam``
(the free energy when it is available) the weights ``a(s) exp(-lam s)``
have a sum of order one, so the partition sums ``Z_t exp(-lam t)`` neither
grow nor shrink exponentially.  The scale is adjusted on the fly if the
rescaled values ever drift outside ``[1e-150, 1e150]``.  Logs are taken
only on output.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .freeenergy import ConvergenceError, z_value
from .model import BaseLaw, PinningModel

T_MAX = 100_000
ENUM_MAX = 16
_BLOCK = 64


class OracleNotApplicable(ValueError):
    """The requested exact oracle does not apply to this model."""


class NoPath(ValueError):
    """Z^c_t = 0: no renewal configuration ends exactly at t."""


@dataclass(frozen=True)
class ExactTables:
    t_max: int
    log_zc: np.ndarray
    scale: float
    dp: Optional[np.ndarray] = None  # log weights over (time, reward column)
    w_values: Optional[np.ndarray] = None  # reward value of each dp column at the last row

    def zc(self, t: int) -> float:
        return math.exp(self.log_zc[t])


def _scale(model: PinningModel) -> float:
    try:
        return z_value(model, np.zeros(model.dim))
    except ConvergenceError:
        return model.weights.z_o


def _weights(model: PinningModel, t: int) -> np.ndarray:
    """a(0..t) with a(0) = 0."""
    a = np.zeros(t + 1)
    if t:
        a[1:] = model.weights.weights(np.arange(1, t + 1))
    return a


def _renewal(a: np.ndarray, t_max: int, lam: float) -> tuple[np.ndarray, float]:
    """u_t = sum_s a(s) e^(-lam s) u_{t-s} with u_0 = 1; returns (u, lam)."""
    s = np.arange(t_max + 1)
    with np.errstate(under="ignore"):
        at = a * np.exp(-lam * s)
    u = np.zeros(t_max + 1)
    u[0] = 1.0
    for t in range(1, t_max + 1):
        u[t] = at[t:0:-1] @ u[:t]
        x = u[t]
        if x > 1e150 or (0 < x < 1e-150):
            # move the scale so that u_t returns to one, rescale the history
            d = math.log(x) / t
            lam += d
            with np.errstate(under="ignore"):
                at = at * np.exp(-d * s)
                u[: t + 1] *= np.exp(-d * s[: t + 1])
    return u, lam


def zc_table(model: PinningModel, t_max: int) -> ExactTables:
    """log Z^c_0..t_max from Z^c_t = sum_{s<=t} a(s) Z^c_{t-s}."""
    if not (0 <= t_max <= T_MAX):
        raise ValueError(f"t_max must lie in [0, {T_MAX}]")
    u, lam = _renewal(_weights(model, t_max), t_max, _scale(model))
    with np.errstate(divide="ignore"):
        log_zc = np.log(u) + lam * np.arange(t_max + 1)
    return ExactTables(t_max, log_zc, lam)


def renewal_mass(base: BaseLaw, t_max: int) -> np.ndarray:
    """u_t = P[renewal at t] under the waiting-time law p (possibly defective)."""
    p = np.zeros(t_max + 1)
    if t_max:
        p[1:] = base.p.weights(np.arange(1, t_max + 1))
    u = np.zeros(t_max + 1)
    u[0] = 1.0
    for t in range(1, t_max + 1):
        u[t] = p[t:0:-1] @ u[:t]
    return u


def joint_renewal_probability(base: BaseLaw, times: Sequence[int]) -> float:
    """P[U_tau = 1 for every tau in ``times``] by a forward chain on the age.

    The age (time since the last renewal) is a Markov chain; from age ``x``
    a renewal happens with probability ``p(x+1) / P[S > x]``.  The event is
    imposed by zeroing every non-zero age at the requested times.
    """
    times = sorted(int(x) for x in times)
    if not times:
        return 1.0
    T = times[-1]
    p = np.zeros(T + 2)
    p[1:] = base.p.weights(np.arange(1, T + 2))
    surv = np.array([base.survival(x) for x in range(T + 1)])
    with np.errstate(divide="ignore", invalid="ignore"):
        hazard = np.where(surv > 0, p[1 : T + 2] / surv, 0.0)
    age = np.zeros(T + 1)
    age[0] = 1.0
    marks = set(times)
    for tau in range(1, T + 1):
        new = np.zeros(T + 1)
        new[0] = float(age[:tau] @ hazard[:tau])
        new[1 : tau + 1] = age[:tau] * (1.0 - hazard[:tau])
        age = new
        if tau in marks:
            age[1:] = 0.0
    return float(age[0])


def kingman_check(base: BaseLaw, pairs: Sequence[tuple]) -> float:
    """max |P[U_a = U_b = 1] - u_a u_{b-a}| over the given time pairs."""
    T = max(max(a, b) for a, b in pairs)
    u = renewal_mass(base, T)
    worst = 0.0
    for a, b in pairs:
        a, b = sorted((int(a), int(b)))
        worst = max(worst, abs(joint_renewal_probability(base, [a, b]) - u[a] * u[b - a]))
    return worst


# ---------------------------------------------------------------------------
# reward distributions


def _integer_rewards(model: PinningModel, t: int) -> tuple[np.ndarray, np.ndarray]:
    """Support points s <= t and their integer rewards f(s)."""
    if model.dim != 1:
        raise OracleNotApplicable("exact reward distributions need a scalar reward")
    s = np.arange(1, t + 1)
    a = model.weights.weights(s)
    sup = s[a > 0]
    f = model.reward_values(sup)[:, 0]
    fi = np.rint(f)
    if np.any(np.abs(f - fi) > 1e-9):
        raise OracleNotApplicable("exact reward distributions need integer rewards")
    return sup, fi.astype(np.int64)


def _affine(sup: np.ndarray, f: np.ndarray) -> Optional[tuple[int, int]]:
    """Integers (alpha, c) with f(s) = alpha s + c on the support, if any."""
    if len(sup) == 1:
        return 0, int(f[0])
    ds = sup[1] - sup[0]
    df = f[1] - f[0]
    if df % ds:
        return None
    alpha = int(df // ds)
    c = int(f[0] - alpha * sup[0])
    if np.all(f == alpha * sup + c):
        return alpha, c
    return None


def _count_table(at: np.ndarray, t: int) -> np.ndarray:
    """D[tau, n] = sum over compositions of tau into n parts of prod at(s_i).

    Rows are filled in blocks: the contribution of all earlier blocks is
    one matrix product with a Toeplitz slice of ``at``.
    """
    D = np.zeros((t + 1, t + 1))
    D[0, 0] = 1.0
    for T0 in range(1, t + 1, _BLOCK):
        T1 = min(T0 + _BLOCK, t + 1)
        A = at[np.arange(T0, T1)[:, None] - np.arange(T0)[None, :]]
        D[T0:T1, 1 : T0 + 1] += A @ D[:T0, :T0]
        for tau in range(T0 + 1, T1):
            coef = at[tau - np.arange(T0, tau)]
            D[tau, 1 : tau + 1] += coef @ D[T0:tau, :tau]
    return D


def _general_table(at: np.ndarray, sup: np.ndarray, f: np.ndarray, t: int) -> tuple[np.ndarray, int]:
    """D[tau, w - w_lo] for arbitrary integer rewards."""
    ratios = f / sup
    w_lo = int(math.floor(min(0.0, t * float(ratios.min()))))
    w_hi = int(math.ceil(max(0.0, t * float(ratios.max()))))
    width = w_hi - w_lo + 1
    D = np.zeros((t + 1, width))
    D[0, -w_lo] = 1.0
    cols = np.arange(width)
    for tau in range(1, t + 1):
        m = sup <= tau
        ss, ff = sup[m], f[m]
        src = cols[None, :] - ff[:, None]
        ok = (src >= 0) & (src < width)
        vals = np.where(ok, D[tau - ss[:, None], np.clip(src, 0, width - 1)], 0.0)
        D[tau] = at[ss] @ vals
    return D, w_lo


def reward_dp(model: PinningModel, t: int) -> ExactTables:
    """Joint table of log Z-weights over (time, integer cumulative reward).

    Row ``tau`` sums to ``Z^c_tau``.
    """
    if t > 5000:
        raise ValueError("reward tables are limited to t <= 5000")
    sup, f = _integer_rewards(model, t)
    lam = _scale(model)
    a = _weights(model, t)
    with np.errstate(under="ignore"):
        at = a * np.exp(-lam * np.arange(t + 1))
    aff = _affine(sup, f)
    taus = np.arange(t + 1)
    if aff is not None and aff[1] != 0:
        alpha, c = aff
        D = _count_table(at, t)
        n = np.arange(t + 1)
        # column n holds N = n, i.e. W = alpha tau + c n; re-index by W at row t
        w_values = alpha * t + c * n
        with np.errstate(divide="ignore"):
            logD = np.log(D) + lam * taus[:, None]
        return ExactTables(t, _row_logsum(logD), lam, logD, w_values)
    D, w_lo = _general_table(at, sup, f, t)
    w_values = np.arange(w_lo, w_lo + D.shape[1])
    with np.errstate(divide="ignore"):
        logD = np.log(D) + lam * taus[:, None]
    return ExactTables(t, _row_logsum(logD), lam, logD, w_values)


def _row_logsum(logD: np.ndarray) -> np.ndarray:
    m = np.max(logD, axis=1)
    m = np.where(np.isfinite(m), m, 0.0)
    with np.errstate(divide="ignore"):
        return m + np.log(np.sum(np.exp(logD - m[:, None]), axis=1))


@dataclass(frozen=True)
class WDistribution:
    """P^c_t[W_t = w] on the integer values ``values``."""

    t: int
    values: np.ndarray
    log_prob: np.ndarray

    @property
    def prob(self) -> np.ndarray:
        return np.exp(self.log_prob)

    def log_pmf(self, w: int) -> float:
        idx = np.flatnonzero(self.values == int(w))
        return float(self.log_prob[idx[0]]) if len(idx) else -math.inf

    def rate(self, x: float) -> float:
        """-(1/t) log P[W_t = round(x t)]."""
        return -self.log_pmf(int(round(x * self.t))) / self.t

    def tail(self, center: float, delta: float) -> float:
        """P[|W_t/t - center| >= delta]."""
        mask = np.abs(self.values / self.t - center) >= delta - 1e-12
        return float(np.sum(self.prob[mask]))


def dist_W(model: PinningModel, t: int) -> WDistribution:
    """Exact law of the integer cumulative reward W_t under P^c_t."""
    tab = reward_dp(model, t)
    row = tab.dp[t]
    log_z = tab.log_zc[t]
    if not math.isfinite(log_z):
        raise NoPath(f"Z^c_{t} = 0")
    values = tab.w_values
    order = np.argsort(values, kind="stable")
    values, row = values[order], row[order]
    keep = np.isfinite(row)
    return WDistribution(t, values[keep], row[keep] - log_z)


def empirical_rates(model: PinningModel, ts: Sequence[int], ws: Sequence[float]) -> list:
    """Rows (t, w, -(1/t) log P^c_t[W_t = round(w t)])."""
    rows = []
    for t in ts:
        dist = dist_W(model, int(t))
        rows.extend((int(t), float(w), dist.rate(w)) for w in ws)
    return rows


# ---------------------------------------------------------------------------
# gap counts and enumeration


def gap_counts(u: Sequence[int], s: int) -> int:
    """Number of gaps of length exactly s between consecutive ones of u_0..u_t."""
    u = np.asarray(u, dtype=np.int64)
    t = len(u) - 1
    if s < 1 or s > t:
        return 0
    zeros = np.concatenate([[0], np.cumsum(1 - u)])
    tau = np.arange(1, t - s + 2)
    # prod_{k=tau}^{tau+s-2} (1 - u_k) is 1 iff u vanishes on that window
    window = zeros[tau + s - 1] - zeros[tau] == s - 1
    return int(np.sum(u[tau - 1] * window * u[tau + s - 1]))


def gap_count_table(U: np.ndarray) -> np.ndarray:
    """Gap counts for every row of a 0/1 matrix U (rows u_0..u_t), s = 1..t."""
    U = np.asarray(U, dtype=np.int64)
    n, T1 = U.shape
    t = T1 - 1
    zeros = np.concatenate([np.zeros((n, 1), dtype=np.int64), np.cumsum(1 - U, axis=1)], axis=1)
    out = np.zeros((n, t), dtype=np.int64)
    for s in range(1, t + 1):
        tau = np.arange(1, t - s + 2)
        window = (zeros[:, tau + s - 1] - zeros[:, tau]) == s - 1
        out[:, s - 1] = np.sum(U[:, tau - 1] * window * U[:, tau + s - 1], axis=1)
    return out


@dataclass(frozen=True)
class Enumeration:
    t: int
    strings: np.ndarray  # rows u_0..u_t with u_0 = u_t = 1
    counts: np.ndarray  # gap counts, column s-1
    weights: np.ndarray  # unnormalized Gibbs weights
    rewards: np.ndarray  # W_t per string, shape (n, d)

    @property
    def zc(self) -> float:
        return float(self.weights.sum())

    @property
    def prob(self) -> np.ndarray:
        return self.weights / self.zc

    def w_histogram(self) -> dict:
        """{W value: probability} for a scalar reward (values rounded to 1e-9)."""
        out: dict = {}
        for w, p in zip(np.round(self.rewards[:, 0], 9), self.prob):
            out[float(w)] = out.get(float(w), 0.0) + float(p)
        return out


def enumerate_marginal(model: PinningModel, t: int) -> Enumeration:
    """P^c_t over all strings, weighting each by prod_s a(s)^(gap count)."""
    if not (1 <= t <= ENUM_MAX):
        raise ValueError(f"enumeration needs 1 <= t <= {ENUM_MAX}")
    inner = np.array(list(itertools.product((0, 1), repeat=t - 1)), dtype=np.int64).reshape(-1, t - 1)
    ones = np.ones((len(inner), 1), dtype=np.int64)
    U = np.hstack([ones, inner, ones])
    counts = gap_count_table(U)
    s = np.arange(1, t + 1)
    a = model.weights.weights(s)
    with np.errstate(divide="ignore", invalid="ignore"):
        loga = np.log(a)
        logw = np.where(counts > 0, counts * loga[None, :], 0.0).sum(axis=1)
    weights = np.exp(logw)
    rewards = counts @ model.reward_values(s)
    return Enumeration(t, U, counts, weights, rewards)
