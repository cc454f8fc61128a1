"""Command-line front end: ``renewal-ldp <command> [options]``.

Exit codes: 0 success, 1 verification failure, 2 configuration error,
3 numerical non-convergence.
"""

from __future__ import annotations

import argparse
import itertools
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from . import exact, freeenergy, model as model_mod, rate, sampler
from .freeenergy import ConvergenceError
from .model import ModelError, PinningModel

EXIT_OK, EXIT_VERIFY, EXIT_CONFIG, EXIT_NONCONV = 0, 1, 2, 3


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    model: PinningModel
    k_grid: list = field(default_factory=list)
    w_grid: list = field(default_factory=list)
    betas: list = field(default_factory=list)
    ts: list = field(default_factory=list)
    delta: Optional[float] = None
    samples: int = 1000
    seed: int = 0
    out: Optional[str] = None
    fmt: str = "csv"
    tol: float = 1e-9
    threads: int = 1


def parse_grid(text: str) -> np.ndarray:
    """'a:b:n' -> n evenly spaced points from a to b; a bare number is one point."""
    parts = text.split(":")
    try:
        if len(parts) == 1:
            return np.array([float(parts[0])])
        if len(parts) != 3:
            raise ValueError
        a, b, n = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise ConfigError(f"bad grid {text!r}; expected a:b:n") from None
    if n < 1 or (n > 1 and not a < b):
        raise ConfigError(f"grid {text!r} must be strictly increasing")
    return np.linspace(a, b, n)


def _product(grids: Sequence[np.ndarray], dim: int, name: str) -> list:
    if not grids:
        return []
    if len(grids) == 1 and dim > 1:
        grids = list(grids) * dim
    if len(grids) != dim:
        raise ConfigError(f"{name} needs one grid per reward dimension ({dim})")
    return [np.array(p) for p in itertools.product(*grids)]


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return format(x, ".17g")
    return "" if x is None else str(x)


def _json_value(x):
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else _fmt(x)
    return x


def emit(columns: Sequence[str], rows: Sequence[Sequence], cfg: RunConfig, metadata: Optional[dict] = None) -> str:
    if cfg.fmt == "json":
        doc = {
            "command": cfg.command,
            "columns": list(columns),
            "rows": [[_json_value(v) for v in row] for row in rows],
        }
        if metadata:
            doc["metadata"] = {k: _json_value(v) for k, v in metadata.items()}
        text = json.dumps(doc, indent=1) + "\n"
    else:
        lines = [",".join(columns)] + [",".join(_fmt(v) for v in row) for row in rows]
        text = "\n".join(lines) + "\n"
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return text


def _pmap(fn: Callable, items: Sequence, threads: int) -> list:
    """Ordered map, threaded when asked."""
    if threads > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


def _cols(prefix: str, d: int) -> list:
    return [prefix] if d == 1 else [f"{prefix}{i + 1}" for i in range(d)]


# ---------------------------------------------------------------------------
# commands


def cmd_validate(cfg: RunConfig) -> int:
    rep = model_mod.validate(cfg.model).as_dict()
    rows = [(k, json.dumps(v) if isinstance(v, list) else v) for k, v in rep.items()]
    emit(["field", "value"], rows, cfg)
    return EXIT_OK if rep["passed"] else EXIT_VERIFY


def cmd_free_energy(cfg: RunConfig) -> int:
    m, d = cfg.model, cfg.model.dim
    ks = cfg.k_grid or [np.zeros(d)]

    def row(k):
        pt = freeenergy.free_energy(m, k, with_hessian=False)
        nu = pt.nu if pt.nu is not None else np.full(d, math.nan)
        return [*k, pt.z, *nu, pt.theta, pt.in_theta, pt.subdiff.kind]

    rows = _pmap(row, ks, cfg.threads)
    emit(_cols("k", d) + ["z"] + _cols("nu", d) + ["theta", "in_theta", "subdiff"], rows, cfg)
    return EXIT_OK


def cmd_rate(cfg: RunConfig) -> int:
    m, d = cfg.model, cfg.model.dim
    if not cfg.w_grid:
        raise ConfigError("rate needs --w-grid")
    solver = rate.RateSolver(m)

    def row(w):
        res = solver.rate(w)
        k = res.dual_k if res.dual_k is not None else np.full(d, math.nan)
        return [*w, res.value, res.branch, *k]

    rows = _pmap(row, cfg.w_grid, cfg.threads)
    emit(_cols("w", d) + ["I", "branch"] + _cols("dual_k", d), rows, cfg)
    return EXIT_OK


def cmd_phase_diagram(cfg: RunConfig) -> int:
    if not cfg.betas:
        raise ConfigError("phase-diagram needs --beta")
    try:
        pd = rate.phase_diagram(cfg.model, cfg.betas)
    except rate.NotApplicable as exc:
        raise ConfigError(str(exc)) from None
    rows = [[b, rho, z0, regime, pd.beta_c, pd.w_c, pd.label] for b, rho, z0, regime in pd.rows]
    emit(["beta", "rho", "z0", "branch", "beta_c", "w_c", "label"], rows, cfg)
    return EXIT_OK


def cmd_exact(cfg: RunConfig) -> int:
    if not cfg.ts:
        raise ConfigError("exact needs --t")
    m = cfg.model
    try:
        if cfg.w_grid:
            ws = [float(w[0]) for w in cfg.w_grid]
            rows = exact.empirical_rates(m, cfg.ts, ws)
            emit(["t", "w", "rate"], rows, cfg)
        else:
            rows = []
            for t in cfg.ts:
                dist = exact.dist_W(m, t)
                rows.extend((t, int(v), p) for v, p in zip(dist.values, dist.prob))
            emit(["t", "n", "probability"], rows, cfg)
    except exact.OracleNotApplicable as exc:
        raise ConfigError(str(exc)) from None
    return EXIT_OK


def cmd_sample(cfg: RunConfig) -> int:
    if not cfg.ts:
        raise ConfigError("sample needs --t")
    m, d = cfg.model, cfg.model.dim
    meta = {"rng": sampler.RNG_FAMILY, "seed": cfg.seed}
    if cfg.delta is not None:
        rows = sampler.deviation_probability(m, cfg.ts, cfg.delta, cfg.samples, cfg.seed, workers=cfg.threads)
        emit(["t", "estimate", "ci_low", "ci_high", "method"],
             [(r.t, r.estimate, r.ci_low, r.ci_high, r.method) for r in rows], cfg, meta)
        return EXIT_OK
    rows = []
    for i, t in enumerate(cfg.ts):
        N, W = sampler.sample_rewards(m, t, cfg.samples, cfg.seed + i, cfg.threads)
        rows.extend((t, j, int(n), *w) for j, (n, w) in enumerate(zip(N, W)))
    emit(["t", "sample", "n_renewals"] + _cols("W", d), rows, cfg, meta)
    return EXIT_OK


def cmd_verify(cfg: RunConfig) -> int:
    from .verify import run_checks

    results = run_checks(cfg.model, tol=cfg.tol, seed=cfg.seed)
    emit(["check", "passed", "detail"], [(r.name, r.passed, r.detail) for r in results], cfg)
    return EXIT_OK if all(r.passed for r in results) else EXIT_VERIFY


COMMANDS = {
    "validate": cmd_validate,
    "free-energy": cmd_free_energy,
    "rate": cmd_rate,
    "phase-diagram": cmd_phase_diagram,
    "exact": cmd_exact,
    "sample": cmd_sample,
    "verify": cmd_verify,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="renewal-ldp", description="Free energies and rate functions of constrained pinning models.")
    p.add_argument("command", choices=sorted(COMMANDS))
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--model", metavar="FILE", help="JSON model file")
    src.add_argument("--preset", metavar="NAME", help=f"one of {', '.join(sorted(model_mod.PRESETS))}")
    p.add_argument("--params", metavar="JSON", default="{}", help="preset parameters as a JSON object")
    p.add_argument("--k-grid", action="append", default=[], metavar="a:b:n", help="repeat once per dimension")
    p.add_argument("--w-grid", action="append", default=[], metavar="a:b:n", help="repeat once per dimension")
    p.add_argument("--beta", metavar="a:b:n")
    p.add_argument("--t", metavar="LIST", help="comma-separated horizons")
    p.add_argument("--delta", type=float)
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", metavar="FILE")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--tol", type=float, default=1e-9, help="verification tolerance")
    return p


_VALUE_FLAGS = ("--k-grid", "--w-grid", "--beta", "--delta", "--t")


def _join_values(argv: Sequence[str]) -> list:
    """Glue '--beta -1:1:5' into '--beta=-1:1:5' so negative grids parse."""
    out, it = [], iter(argv)
    for tok in it:
        if tok in _VALUE_FLAGS:
            nxt = next(it, None)
            out.append(tok if nxt is None else f"{tok}={nxt}")
        else:
            out.append(tok)
    return out


def make_config(argv: Sequence[str]) -> RunConfig:
    ns = build_parser().parse_args(_join_values(argv))
    if ns.model:
        m = model_mod.load_model(ns.model)
    else:
        try:
            params = json.loads(ns.params)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"--params is not valid JSON: {exc}") from None
        if not isinstance(params, dict):
            raise ConfigError("--params must be a JSON object")
        m = model_mod.build_preset(ns.preset, params)
    ts = []
    if ns.t:
        try:
            ts = [int(x) for x in ns.t.split(",") if x.strip()]
        except ValueError:
            raise ConfigError(f"bad --t list {ns.t!r}") from None
        if any(t < 1 for t in ts):
            raise ConfigError("horizons must be positive")
    if ns.tol < 1e-14:
        raise ConfigError("tolerances below 1e-14 are not supported")
    if ns.samples < 1:
        raise ConfigError("--samples must be positive")
    if ns.delta is not None and not ns.delta > 0:
        raise ConfigError("--delta must be positive")
    try:
        threads = max(1, int(os.environ.get("RENEWAL_LDP_THREADS", "1")))
    except ValueError:
        raise ConfigError("RENEWAL_LDP_THREADS must be an integer") from None
    return RunConfig(
        command=ns.command,
        model=m,
        k_grid=_product([parse_grid(g) for g in ns.k_grid], m.dim, "--k-grid"),
        w_grid=_product([parse_grid(g) for g in ns.w_grid], m.dim, "--w-grid"),
        betas=list(parse_grid(ns.beta)) if ns.beta else [],
        ts=ts,
        delta=ns.delta,
        samples=ns.samples,
        seed=ns.seed,
        out=ns.out,
        fmt=ns.format,
        tol=ns.tol,
        threads=threads,
    )


def run(argv: Sequence[str]) -> int:
    try:
        cfg = make_config(argv)
        return COMMANDS[cfg.command](cfg)
    except (ConfigError, ModelError, OSError, json.JSONDecodeError, KeyError) as exc:
        print(f"renewal-ldp: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ConvergenceError, exact.NoPath) as exc:
        print(f"renewal-ldp: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NONCONV


def main(argv: Optional[Sequence[str]] = None) -> int:
    return run(sys.argv[1:] if argv is None else argv)


if __name__ == "__main__":
    sys.exit(main())
