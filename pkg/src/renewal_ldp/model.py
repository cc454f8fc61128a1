"""Pinning models: Boltzmann weights, rewards, base laws and physics presets.

A model is described by the weights ``a(s) = exp(v(s)) p(s)`` of the waiting
times ``s = 1, 2, ...`` and a vector reward ``f(s)``.  Both are stored as an
explicit head table for ``s <= S_head`` plus an optional analytic tail::

    a(s) = A * (s - h)**(-gamma) * exp(ell * s)        for s > S_head
    f(s) = r * s + kappa0 + kappa1 * log(s - h)

where ``h`` is a small integer shift (0 by default; 1 for the
Poland-Scheraga loop entropy, which is naturally a function of ``s - 1``).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property, reduce
from pathlib import Path
from typing import Any, Mapping, Optional

import numpy as np

from ._tailsum import power_tail_sum

MAX_DIM = 4


class ModelError(ValueError):
    """Raised for malformed models or preset parameters."""


def _vec(x, name: str) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(x, dtype=float))
    if arr.ndim != 1:
        raise ModelError(f"{name} must be a vector")
    if not np.all(np.isfinite(arr)):
        raise ModelError(f"{name} must be finite")
    return arr


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class TailSpec:
    """Analytic tail ``amplitude * (s - shift)**(-power) * exp(rate * s)``."""

    amplitude: float
    power: float
    rate: float
    shift: int = 0

    def __post_init__(self):
        if not (self.amplitude > 0 and math.isfinite(self.amplitude)):
            raise ModelError("tail amplitude must be positive and finite")
        if not (math.isfinite(self.power) and math.isfinite(self.rate)):
            raise ModelError("tail power and rate must be finite")
        if int(self.shift) != self.shift or self.shift < 0:
            raise ModelError("tail shift must be a non-negative integer")

    def log_weight(self, s: np.ndarray) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        return math.log(self.amplitude) - self.power * np.log(s - self.shift) + self.rate * s

    def scaled(self, factor: float) -> "TailSpec":
        return TailSpec(self.amplitude * factor, self.power, self.rate, self.shift)


@dataclass(frozen=True)
class WeightModel:
    """Weights ``a(1..S_head)`` and an optional :class:`TailSpec` beyond."""

    head: np.ndarray
    tail: Optional[TailSpec] = None

    def __post_init__(self):
        head = np.atleast_1d(np.asarray(self.head, dtype=float))
        if head.ndim != 1:
            raise ModelError("head weights must be one-dimensional")
        if np.any(head < 0) or not np.all(np.isfinite(head)):
            raise ModelError("head weights must be finite and non-negative")
        object.__setattr__(self, "head", _frozen(head))
        if self.tail is None and not np.any(head > 0):
            raise ModelError("a model without tail needs a non-empty support")
        if self.tail is not None and self.tail.shift > len(head):
            raise ModelError("tail shift cannot exceed the head length")

    @property
    def size(self) -> int:
        return len(self.head)

    @property
    def ell(self) -> float:
        """limsup of log(a(s))/s; ``-inf`` for finite support."""
        return -math.inf if self.tail is None else self.tail.rate

    @property
    def support_head(self) -> np.ndarray:
        return np.flatnonzero(self.head > 0) + 1

    def log_weights(self, s) -> np.ndarray:
        """log a(s) for an array of positive integers (``-inf`` off support)."""
        s = np.asarray(s, dtype=np.int64)
        out = np.full(s.shape, -math.inf)
        inhead = s <= self.size
        with np.errstate(divide="ignore"):
            out[inhead] = np.log(self.head[s[inhead] - 1])
        if self.tail is not None:
            out[~inhead] = self.tail.log_weight(s[~inhead])
        return out

    def weights(self, s) -> np.ndarray:
        return np.exp(self.log_weights(s))

    def support_gcd(self) -> int:
        if self.tail is not None:
            return 1
        return int(reduce(math.gcd, self.support_head.tolist()))

    def extensivity_bound(self) -> float:
        """A real ``z_o`` with ``a(s) <= exp(z_o s)`` for every s."""
        cands = []
        sup = self.support_head
        if len(sup):
            cands.append(float(np.max(np.log(self.head[sup - 1]) / sup)))
        if self.tail is not None:
            s = _tail_grid(self.size)
            vals = (self.tail.log_weight(s) - self.tail.rate * s) / s
            cands.append(self.tail.rate + max(0.0, float(np.max(vals))))
        return max(cands)

    @cached_property
    def z_o(self) -> float:
        return self.extensivity_bound()

    def total(self) -> float:
        """Sum of all weights (may be ``inf``)."""
        head = float(self.head.sum())
        if self.tail is None:
            return head
        return head + tail_sum(self.tail, self.size, 0.0)[0]

    def scaled(self, factor: float) -> "WeightModel":
        tail = None if self.tail is None else self.tail.scaled(factor)
        return WeightModel(self.head * factor, tail)


def _tail_grid(S: int) -> np.ndarray:
    dense = np.arange(S + 1, S + 4097, dtype=float)
    sparse = np.geomspace(S + 4097, 1e12, 400)
    return np.concatenate([dense, np.floor(sparse)])


def tail_sum(tail: TailSpec, S: int, lam: float) -> tuple[float, float]:
    """sum_{s > S} a(s) exp(-lam s) for the tail weights, as (value, error)."""
    h = tail.shift
    lam_eff = lam - tail.rate
    if lam_eff < 0:
        return math.inf, 0.0
    pref = tail.amplitude * math.exp(-lam_eff * h)
    val, err, _ = power_tail_sum(float(tail.power), 0, float(lam_eff), S + 1 - h)
    return pref * val, pref * err


@dataclass(frozen=True)
class RewardSpec:
    """Vector rewards f(1..S_head) with tail ``r s + kappa0 + kappa1 log(s - h)``."""

    head: np.ndarray
    slope: np.ndarray
    offset: np.ndarray
    log_coef: np.ndarray

    def __post_init__(self):
        head = np.asarray(self.head, dtype=float)
        if head.ndim == 1:
            head = head[:, None]
        if head.ndim != 2 or not np.all(np.isfinite(head)):
            raise ModelError("reward head must be a finite (S_head, d) table")
        d = head.shape[1]
        for name in ("slope", "offset", "log_coef"):
            v = _vec(getattr(self, name), name)
            if len(v) == 1 and d > 1:
                v = np.repeat(v, d)
            if len(v) != d:
                raise ModelError(f"reward {name} has dimension {len(v)}, expected {d}")
            object.__setattr__(self, name, _frozen(v))
        object.__setattr__(self, "head", _frozen(head))

    @property
    def dim(self) -> int:
        return self.head.shape[1]

    def values(self, s, shift: int = 0) -> np.ndarray:
        """f(s) as an array of shape (len(s), d)."""
        s = np.atleast_1d(np.asarray(s, dtype=np.int64))
        out = np.empty((len(s), self.dim))
        inhead = s <= len(self.head)
        out[inhead] = self.head[s[inhead] - 1]
        st = s[~inhead].astype(float)
        if len(st):
            out[~inhead] = (
                np.outer(st, self.slope)
                + self.offset
                + np.outer(np.log(st - shift), self.log_coef)
            )
        return out

    @classmethod
    def constant(cls, S_head: int, value=1.0) -> "RewardSpec":
        value = _vec(value, "value")
        return cls(np.tile(value, (S_head, 1)), np.zeros_like(value), value, np.zeros_like(value))

    @classmethod
    def linear(cls, S_head: int, slope=1.0) -> "RewardSpec":
        """f(s) = slope * s exactly."""
        slope = _vec(slope, "slope")
        s = np.arange(1, S_head + 1, dtype=float)
        return cls(np.outer(s, slope), slope, np.zeros_like(slope), np.zeros_like(slope))

    @classmethod
    def stack(cls, *specs: "RewardSpec") -> "RewardSpec":
        return cls(
            np.hstack([sp.head for sp in specs]),
            np.concatenate([sp.slope for sp in specs]),
            np.concatenate([sp.offset for sp in specs]),
            np.concatenate([sp.log_coef for sp in specs]),
        )


@dataclass(frozen=True)
class BaseLaw:
    """Waiting-time law ``p`` (possibly defective) and potential ``v``."""

    p: WeightModel
    v_head: np.ndarray
    v_tail: float = 0.0
    mass_at_infinity: float = 0.0

    def __post_init__(self):
        v = np.atleast_1d(np.asarray(self.v_head, dtype=float))
        if len(v) != self.p.size:
            raise ModelError("v_head must match the p head length")
        object.__setattr__(self, "v_head", _frozen(v))
        if not (0.0 <= self.mass_at_infinity <= 1.0):
            raise ModelError("mass_at_infinity must lie in [0, 1]")
        if abs(self.p.total() + self.mass_at_infinity - 1.0) > 1e-12:
            raise ModelError("p and mass_at_infinity must add up to one")

    def weights(self) -> WeightModel:
        """The Boltzmann weights exp(v(s)) p(s)."""
        tail = None if self.p.tail is None else self.p.tail.scaled(math.exp(self.v_tail))
        return WeightModel(np.exp(self.v_head) * self.p.head, tail)

    def survival(self, a: int) -> float:
        """P[S_1 > a], mass at infinity included."""
        S = self.p.size
        tot = self.mass_at_infinity
        if a < S:
            tot += float(self.p.head[a:].sum())
        if self.p.tail is not None:
            tot += tail_sum(self.p.tail, max(a, S), 0.0)[0]
        return tot


@dataclass(frozen=True)
class PinningModel:
    """Weights plus rewards: everything z, theta, I and Z^c depend on."""

    weights: WeightModel
    rewards: RewardSpec
    base: Optional[BaseLaw] = None
    name: str = ""

    def __post_init__(self):
        if len(self.rewards.head) != self.weights.size:
            raise ModelError("reward head and weight head must have the same length")

    @property
    def dim(self) -> int:
        return self.rewards.dim

    @property
    def size(self) -> int:
        return self.weights.size

    @property
    def tail(self) -> Optional[TailSpec]:
        return self.weights.tail

    @property
    def shift(self) -> int:
        return 0 if self.weights.tail is None else self.weights.tail.shift

    @property
    def ell(self) -> float:
        return self.weights.ell

    @property
    def s_o(self) -> int:
        return int(self.weights.support_head[0])

    @property
    def r(self) -> np.ndarray:
        """Asymptotic reward per unit time (s_o convention for finite support)."""
        if self.weights.tail is not None:
            return np.array(self.rewards.slope)
        s0 = self.s_o
        return self.rewards.head[s0 - 1] / s0

    def reward_values(self, s) -> np.ndarray:
        return self.rewards.values(s, self.shift)

    def reward_bound(self) -> float:
        """M with ||f(s)|| <= M s on the support."""
        cands = [0.0]
        sup = self.weights.support_head
        if len(sup):
            f = self.rewards.head[sup - 1]
            cands.append(float(np.max(np.linalg.norm(f, axis=1) / sup)))
        if self.weights.tail is not None:
            s = _tail_grid(self.size)
            f = self.reward_values(s.astype(np.int64))
            cands.append(float(np.max(np.linalg.norm(f, axis=1) / s)))
            cands.append(float(np.linalg.norm(self.rewards.slope)))
        return max(cands)

    @cached_property
    def M(self) -> float:
        return self.reward_bound()

    def with_rewards(self, rewards: RewardSpec) -> "PinningModel":
        return PinningModel(self.weights, rewards, self.base, self.name)

    def with_weights(self, weights: WeightModel) -> "PinningModel":
        return PinningModel(weights, self.rewards, None, self.name)


@dataclass(frozen=True)
class ValidationReport:
    ell: float
    z_o: float
    M: float
    r: np.ndarray
    support_gcd: int
    dim: int
    violations: tuple = ()

    @property
    def passed(self) -> bool:
        return not self.violations

    def as_dict(self) -> dict:
        return {
            "passed": self.passed,
            "ell": self.ell,
            "z_o": self.z_o,
            "M": self.M,
            "r": [float(x) for x in self.r],
            "support_gcd": self.support_gcd,
            "dim": self.dim,
            "violations": list(self.violations),
        }


def validate(model: PinningModel) -> ValidationReport:
    """Check aperiodicity, extensivity and the reward-limit assumption."""
    violations = []
    g = model.weights.support_gcd()
    if g != 1:
        violations.append(f"assumption-1: support is periodic with gcd {g}")
    z_o = model.weights.extensivity_bound()
    if not math.isfinite(z_o):
        violations.append("assumption-2: potential is not extensive")
    M = model.reward_bound()
    if not math.isfinite(M):
        violations.append("assumption-3: rewards grow faster than the waiting time")
    if model.dim > MAX_DIM:
        violations.append(f"unsupported-dimension: d={model.dim} > {MAX_DIM}")
    return ValidationReport(model.ell, z_o, M, model.r, g, model.dim, tuple(violations))


# ---------------------------------------------------------------------------
# normalization and presets


def eta_normalize(raw: WeightModel, *, tol: float = 1e-15) -> tuple[float, BaseLaw]:
    """Find eta so that p(s) = b(s) exp(-eta s) is a (possibly defective) law.

    With a tail of rate ``eta_o``, ``eta >= eta_o`` is the root of
    ``sum p = 1`` when the sum at ``eta_o`` is at least one; otherwise
    ``eta = eta_o`` and the missing mass sits at infinity.
    """

    def total(eta: float) -> float:
        with np.errstate(over="ignore"):
            head = float(np.sum(raw.head * np.exp(-eta * np.arange(1, raw.size + 1))))
        if raw.tail is None:
            return head
        return head + tail_sum(raw.tail, raw.size, eta)[0]

    if raw.tail is not None:
        eta_o = raw.tail.rate
        at_o = total(eta_o)
        if at_o < 1.0:
            p = _apply_eta(raw, eta_o)
            return eta_o, BaseLaw(p, np.zeros(raw.size), 0.0, 1.0 - p.total())
        lo, step = eta_o, 1.0
        hi = eta_o + step
        while total(hi) >= 1.0:
            lo, step = hi, step * 2
            hi = eta_o + step
    else:
        sup = raw.support_head
        # sum is decreasing from +inf to 0; bracket around the smallest support point
        s0 = sup[0]
        lo = math.log(raw.head[s0 - 1]) / s0 - 1.0
        while total(lo) < 1.0:
            lo -= abs(lo) + 1.0
        hi = lo + 1.0
        while total(hi) >= 1.0:
            hi += 2 * (hi - lo)

    if not math.isfinite(total(hi)):
        raise ModelError("normalization sum diverges for every eta")
    for _ in range(400):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi or hi - lo <= tol * max(1.0, abs(mid)):
            break
        if total(mid) >= 1.0:
            lo = mid
        else:
            hi = mid
    eta = lo if abs(total(lo) - 1.0) <= abs(total(hi) - 1.0) else hi
    p = _apply_eta(raw, eta)
    mass = max(0.0, 1.0 - p.total())
    if abs(p.total() + mass - 1.0) > 1e-12:
        raise ModelError("eta normalization did not reach unit mass")
    return eta, BaseLaw(p, np.zeros(raw.size), 0.0, mass)


def _apply_eta(raw: WeightModel, eta: float) -> WeightModel:
    s = np.arange(1, raw.size + 1)
    head = raw.head * np.exp(-eta * s)
    tail = None
    if raw.tail is not None:
        t = raw.tail
        tail = TailSpec(t.amplitude, t.power, t.rate - eta, t.shift)
    return WeightModel(head, tail)


def _with_potential(base: BaseLaw, v: float) -> BaseLaw:
    return BaseLaw(base.p, np.full(base.p.size, v), v, base.mass_at_infinity)


@dataclass(frozen=True)
class Preset:
    """A built physics model: weights, base law, and a catalog of rewards."""

    name: str
    weights: WeightModel
    base: BaseLaw
    rewards: Mapping[str, RewardSpec]
    eta: float = 0.0
    params: Mapping[str, Any] = field(default_factory=dict)

    def model(self, reward: Optional[str] = None) -> PinningModel:
        key = reward or next(iter(self.rewards))
        if key not in self.rewards:
            raise ModelError(f"unknown reward {key!r}; have {sorted(self.rewards)}")
        return PinningModel(self.weights, self.rewards[key], self.base, f"{self.name}:{key}")


def make_poland_scheraga(a: float, b: float, c: float, eps: float, S_head: int = 64) -> Preset:
    """DNA melting: loop entropy ``a l + b - c log l``, binding energy ``eps``.

    Renewals mark bound monomers; ``p(s) = exp(sigma_{s-1} - eta s)``.
    """
    if c < 0:
        raise ModelError("loop exponent c must be non-negative")
    if S_head < 2:
        raise ModelError("S_head must be at least 2")
    l = np.arange(1, S_head, dtype=float)
    sigma = np.concatenate([[0.0], a * l + b - c * np.log(l)])  # sigma_0..sigma_{S-1}
    raw = WeightModel(np.exp(sigma), TailSpec(math.exp(b - a), c, a, 1))
    eta, base = eta_normalize(raw)
    base = _with_potential(base, -eps)
    ones = RewardSpec.constant(S_head, 1.0)
    loop = RewardSpec(sigma[:, None], [a], [b - a], [-c])
    rewards = {"bound": ones, "loop_entropy": loop, "pair": RewardSpec.stack(ones, loop)}
    params = dict(a=a, b=b, c=c, eps=eps, S_head=S_head)
    return Preset("poland-scheraga", base.weights(), base, rewards, eta, params)


def make_cluster_model(E, eta_o: float, mu: float) -> Preset:
    """Fisher-Felderhof / Tokar-Dreysse lattice gas; renewals mark holes.

    ``E`` holds the cluster energies ``E_1..E_{S_head-1}``; beyond the head
    they continue linearly with slope ``eta_o``.
    """
    E = np.concatenate([[0.0], np.atleast_1d(np.asarray(E, dtype=float))])
    if not np.all(np.isfinite(E)):
        raise ModelError("cluster energies must be finite")
    if not math.isfinite(eta_o):
        raise ModelError("tail slope must be finite")
    L = len(E) - 1
    if L >= 1:
        inc = E[-1] - E[-2]
        if abs(inc - eta_o) > 1e-9 * max(1.0, abs(eta_o)):
            raise ModelError(
                f"tail slope {eta_o} inconsistent with last head increment {inc}"
            )
    S_head = L + 1
    # b(s) = exp(-E_{s-1}); tail exp(-E_L - eta_o (s - 1 - L))
    raw = WeightModel(np.exp(-E), TailSpec(math.exp(-E[-1] + eta_o * (L + 1)), 0.0, -eta_o))
    neg_eta, base = eta_normalize(raw)
    base = _with_potential(base, -mu)
    holes = RewardSpec.constant(S_head, 1.0)
    energy = RewardSpec(E[:, None], [eta_o], [E[-1] - eta_o * (L + 1)], [0.0])
    rewards = {"holes": holes, "energy": energy, "pair": RewardSpec.stack(holes, energy)}
    params = dict(E=E[1:].tolist(), eta_o=eta_o, mu=mu)
    return Preset("cluster", base.weights(), base, rewards, -neg_eta, params)


def wsme_energies(eps) -> np.ndarray:
    """E_1..E_{K+1} from couplings eps_1..eps_K (eps_s = 0 beyond K)."""
    eps = _vec(eps, "eps")
    K = len(eps)
    s = np.arange(1, K + 1)
    return np.array([np.sum((l - s[s <= l]) * eps[: min(l, K)]) for l in range(1, K + 2)])


def make_wsme(eps, sigma: float) -> Preset:
    """Protein folding with homogeneous couplings; renewals mark non-native bonds."""
    eps = _vec(eps, "eps")
    E = wsme_energies(eps)
    pre = make_cluster_model(E, float(eps.sum()), -sigma)
    params = dict(eps=eps.tolist(), sigma=sigma)
    return Preset("wsme", pre.weights, pre.base, pre.rewards, pre.eta, params)


def geometric(q: float = 0.5, beta: float = 0.0) -> PinningModel:
    """p(s) = (1 - q) q^(s-1) with constant potential beta and f = 1."""
    p = WeightModel([1.0 - q], TailSpec((1.0 - q) / q, 0.0, math.log(q)))
    base = BaseLaw(p, [0.0], 0.0, 0.0)
    base = _with_potential(base, beta)
    return PinningModel(base.weights(), RewardSpec.constant(1, 1.0), base, "geometric")


def dirac(value=1.0) -> PinningModel:
    """Deterministic unit waiting times: p(1) = 1."""
    value = _vec(value, "value")
    p = WeightModel([1.0])
    base = BaseLaw(p, [0.0], 0.0, 0.0)
    return PinningModel(p, RewardSpec(value[None, :], value, np.zeros_like(value), np.zeros_like(value)), base, "dirac")


def zeta_model(c: float, beta: float = 0.0, S_head: int = 1) -> PinningModel:
    """p(s) = s^-c / zeta(c), constant potential beta, f = 1."""
    if c <= 1:
        raise ModelError("zeta model needs c > 1")
    zc = power_tail_sum(float(c), 0, 0.0, 1)[0]
    s = np.arange(1, S_head + 1, dtype=float)
    p = WeightModel(s**-c / zc, TailSpec(1.0 / zc, c, 0.0))
    mass = max(0.0, 1.0 - p.total())
    base = _with_potential(BaseLaw(p, np.zeros(S_head), 0.0, mass), beta)
    return PinningModel(base.weights(), RewardSpec.constant(S_head, 1.0), base, "zeta")


PRESETS = {
    "geometric": geometric,
    "dirac": dirac,
    "zeta": zeta_model,
    "poland-scheraga": make_poland_scheraga,
    "cluster": make_cluster_model,
    "wsme": make_wsme,
}


def build_preset(name: str, params: Optional[Mapping[str, Any]] = None) -> PinningModel:
    """Build a named preset; ``params`` may carry ``reward`` to pick from the catalog."""
    params = dict(params or {})
    if name not in PRESETS:
        raise ModelError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
    reward = params.pop("reward", None)
    try:
        out = PRESETS[name](**params)
    except TypeError as exc:
        raise ModelError(f"bad parameters for preset {name!r}: {exc}") from None
    if isinstance(out, Preset):
        return out.model(reward)
    if reward is not None:
        raise ModelError(f"preset {name!r} has a single reward")
    return out


def _tail_from_json(obj) -> Optional[TailSpec]:
    if obj is None:
        return None
    return TailSpec(float(obj["A"]), float(obj["gamma"]), float(obj["ell"]), int(obj.get("shift", 0)))


def model_from_dict(doc: Mapping[str, Any]) -> PinningModel:
    """Parse the JSON model schema (explicit fields or a preset, not both)."""
    preset = doc.get("preset")
    explicit = any(doc.get(k) is not None for k in ("head_weights", "tail", "rewards", "base"))
    if preset is not None and explicit:
        raise ModelError("preset and explicit model fields are mutually exclusive")
    if preset is not None:
        return build_preset(preset["name"], preset.get("params"))
    if doc.get("head_weights") is None:
        raise ModelError("model needs head_weights or a preset")
    weights = WeightModel(doc["head_weights"], _tail_from_json(doc.get("tail")))
    rw = doc.get("rewards")
    if rw is None:
        rewards = RewardSpec.constant(weights.size, 1.0)
    else:
        head = np.asarray(rw["head"], dtype=float)
        d = 1 if head.ndim == 1 else head.shape[1]
        zero = [0.0] * d
        rewards = RewardSpec(head, rw.get("r", zero), rw.get("kappa0", zero), rw.get("kappa1", zero))
    base = None
    if doc.get("base") is not None:
        b = doc["base"]
        p = WeightModel(b["p_head"], _tail_from_json(b.get("p_tail")))
        base = BaseLaw(p, b.get("v_head", [0.0] * p.size), float(b.get("v_tail", 0.0)),
                       float(b.get("mass_at_infinity", 0.0)))
        w = base.weights()
        if not np.allclose(w.head, weights.head, rtol=1e-12, atol=0):
            raise ModelError("base law does not reproduce head_weights")
    return PinningModel(weights, rewards, base, doc.get("name", ""))


def load_model(path) -> PinningModel:
    with open(Path(path)) as fh:
        return model_from_dict(json.load(fh))


def model_to_dict(model: PinningModel) -> dict:
    def tail(t):
        if t is None:
            return None
        return {"A": t.amplitude, "gamma": t.power, "ell": t.rate, "shift": t.shift}

    doc = {
        "name": model.name,
        "head_weights": model.weights.head.tolist(),
        "tail": tail(model.weights.tail),
        "rewards": {
            "head": model.rewards.head.tolist(),
            "r": model.rewards.slope.tolist(),
            "kappa0": model.rewards.offset.tolist(),
            "kappa1": model.rewards.log_coef.tolist(),
        },
        "base": None,
    }
    if model.base is not None:
        b = model.base
        doc["base"] = {
            "p_head": b.p.head.tolist(),
            "p_tail": tail(b.p.tail),
            "v_head": b.v_head.tolist(),
            "v_tail": b.v_tail,
            "mass_at_infinity": b.mass_at_infinity,
        }
    return doc
