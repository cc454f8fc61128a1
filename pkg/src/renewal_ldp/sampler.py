"""Exact draws from the constrained model, and deviation probabilities.

Given a remaining horizon tau, the next waiting time is ``s`` with
probability ``a(s) Z^c_{tau-s} / Z^c_tau``.  Batches are sampled by
sweeping tau downward: every path whose remaining horizon equals tau
draws at that moment, so a single CDF row serves all of them.

Random numbers come from numpy's counter-based Philox generator; a batch
of ``n`` paths is cut into fixed chunks with independent spawned streams,
so results do not depend on how chunks are scheduled.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy import stats

from .exact import NoPath, OracleNotApplicable, _renewal, _scale, _weights, dist_W
from .freeenergy import criticality
from .model import PinningModel

RNG_FAMILY = "numpy.random.Philox"
CHUNK = 10_000


@dataclass(frozen=True)
class PathSample:
    waiting_times: tuple
    rewards_total: np.ndarray
    seed: int

    @property
    def n_renewals(self) -> int:
        return len(self.waiting_times)

    @property
    def t(self) -> int:
        return int(sum(self.waiting_times))


class _Tables:
    """Rescaled weights and partition sums up to t."""

    def __init__(self, model: PinningModel, t: int):
        lam = _scale(model)
        a = _weights(model, t)
        u, lam = _renewal(a, t, lam)
        if u[t] <= 0:
            raise NoPath(f"Z^c_{t} = 0")
        with np.errstate(under="ignore"):
            self.at = a * np.exp(-lam * np.arange(t + 1))
        self.u = u
        self.f = model.reward_values(np.arange(1, t + 1)) if t else np.zeros((0, model.dim))

    def cdf(self, tau: int) -> np.ndarray:
        """CDF of the next waiting time s = 1..tau given horizon tau."""
        w = self.at[1 : tau + 1] * self.u[tau - 1 :: -1][:tau]
        c = np.cumsum(w)
        c /= c[-1]
        c[-1] = 1.0
        return c


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(seed))


def sample_path(model: PinningModel, t: int, seed: int) -> PathSample:
    tab = _Tables(model, t)
    rng = _rng(seed)
    tau, out = t, []
    while tau > 0:
        s = int(np.searchsorted(tab.cdf(tau), rng.random(), side="right")) + 1
        out.append(s)
        tau -= s
    total = tab.f[np.array(out) - 1].sum(axis=0)
    return PathSample(tuple(out), total, int(seed))


def _sample_chunk(tab: _Tables, t: int, n: int, rng: np.random.Generator):
    remaining = np.full(n, t, dtype=np.int64)
    counts = np.zeros(n, dtype=np.int64)
    rewards = np.zeros((n, tab.f.shape[1]))
    for tau in range(t, 0, -1):
        idx = np.flatnonzero(remaining == tau)
        if not len(idx):
            continue
        s = np.searchsorted(tab.cdf(tau), rng.random(len(idx)), side="right") + 1
        remaining[idx] -= s
        counts[idx] += 1
        rewards[idx] += tab.f[s - 1]
    return counts, rewards


def sample_rewards(
    model: PinningModel, t: int, n: int, seed: int, workers: int = 1
) -> tuple[np.ndarray, np.ndarray]:
    """(N_t, W_t) for ``n`` independent exact draws."""
    tab = _Tables(model, t)
    sizes = [min(CHUNK, n - i) for i in range(0, n, CHUNK)]
    streams = np.random.SeedSequence(seed).spawn(len(sizes))
    jobs = [(size, np.random.Generator(np.random.Philox(ss))) for size, ss in zip(sizes, streams)]
    if workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda j: _sample_chunk(tab, t, j[0], j[1]), jobs))
    else:
        parts = [_sample_chunk(tab, t, size, rng) for size, rng in jobs]
    if not parts:
        return np.zeros(0, dtype=np.int64), np.zeros((0, model.dim))
    return np.concatenate([p[0] for p in parts]), np.vstack([p[1] for p in parts])


def sample_counts(model: PinningModel, t: int, n: int, seed: int, workers: int = 1) -> np.ndarray:
    return sample_rewards(model, t, n, seed, workers)[0]


@dataclass(frozen=True)
class DeviationRow:
    t: int
    estimate: float
    ci_low: float
    ci_high: float
    method: str  # "exact" or "mc"

    @property
    def rate(self) -> float:
        """-(1/t) log of the estimate."""
        return -math.log(self.estimate) / self.t if self.estimate > 0 else math.inf


def deviation_probability(
    model: PinningModel,
    ts: Sequence[int],
    delta: float,
    n_samples: int = 10_000,
    seed: int = 0,
    rho: Optional[np.ndarray] = None,
    workers: int = 1,
) -> list:
    """P^c_t[ ||W_t/t - rho|| >= delta ] for each t, exact when possible."""
    rho = criticality(model).rho if rho is None else np.atleast_1d(np.asarray(rho, dtype=float))
    rows = []
    for i, t in enumerate(ts):
        t = int(t)
        try:
            if t > 5000:
                raise OracleNotApplicable("beyond the exact table limit")
            dist = dist_W(model, t)
            p = dist.tail(float(rho[0]), delta)
            rows.append(DeviationRow(t, p, p, p, "exact"))
            continue
        except OracleNotApplicable:
            pass
        _, W = sample_rewards(model, t, n_samples, seed + i, workers)
        hits = int(np.sum(np.linalg.norm(W / t - rho, axis=1) >= delta - 1e-12))
        ci = stats.binomtest(hits, n_samples).proportion_ci(confidence_level=0.95, method="wilson")
        rows.append(DeviationRow(t, hits / n_samples, float(ci.low), float(ci.high), "mc"))
    return rows
