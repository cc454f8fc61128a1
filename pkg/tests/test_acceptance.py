"""End-to-end acceptance checks; each test prints one PASS/FAIL summary line.

Run alone with ``pytest tests/test_acceptance.py`` or ``python tests/test_acceptance.py``.
"""

import math
import time

import numpy as np
import pytest
from scipy import stats

from conftest import geometric_rate, geometric_z, random_model, riemann_zeta
from renewal_ldp.exact import dist_W, enumerate_marginal, gap_counts, kingman_check, zc_table
from renewal_ldp.freeenergy import criticality, free_energy, nu, z_value
from renewal_ldp.model import build_preset, geometric, make_poland_scheraga, zeta_model
from renewal_ldp.rate import RateSolver, nt_suite
from renewal_ldp.sampler import deviation_probability, sample_counts

W_C = riemann_zeta(2.5) / riemann_zeta(1.5)


def test_criterion_1_closed_form_rate(record_property):
    record_property("title", "closed-form rate recovery (geometric, 99 points)")
    start = time.perf_counter()
    solver = RateSolver(geometric())
    ws = np.linspace(0.01, 0.99, 99)
    rate_err = max(abs(solver.rate([w]).value - geometric_rate(w)) for w in ws)
    z_err = max(abs(z_value(geometric(), [k]) - geometric_z(k)) for k in np.linspace(-5, 5, 41))
    elapsed = time.perf_counter() - start
    assert rate_err <= 1e-9
    assert z_err <= 1e-10
    assert elapsed < 1.0


def test_criterion_2_ldp_convergence(record_property):
    record_property("title", "finite-t rates converge to I within 25 ln t / t")
    start = time.perf_counter()
    m = geometric()
    solver = RateSolver(m)
    ts = [250, 500, 1000, 2000]
    dists = {t: dist_W(m, t) for t in ts}
    for w in (0.25, 0.5, 0.75):
        I = solver.rate([w]).value
        errs = [abs(dists[t].rate(w) - I) for t in ts]
        assert all(b < a for a, b in zip(errs, errs[1:])), errs
        assert errs[-1] <= 25 * math.log(2000) / 2000
    assert time.perf_counter() - start < 30.0


def test_criterion_3_consistency_triangle(record_property):
    record_property("title", "enumeration, reward DP and partition recursion agree")
    for seed in range(5):
        rng = np.random.default_rng(1000 + seed)
        m = random_model(rng, integer=True)
        t = int(rng.integers(8, 15))
        e = enumerate_marginal(m, t)
        assert e.zc == pytest.approx(zc_table(m, t).zc(t), rel=1e-12)
        hist = e.w_histogram()
        d = dist_W(m, t)
        for v, p in zip(d.values, d.prob):
            assert hist.pop(float(v)) == pytest.approx(p, abs=1e-12)
        assert all(p == 0.0 for p in hist.values())
        for row in e.strings:
            counts = [gap_counts(row, s) for s in range(1, t + 1)]
            assert sum(counts) == int(row.sum()) - 1
            assert sum(s * c for s, c in zip(range(1, t + 1), counts)) == t


def test_criterion_4_phase_classification(record_property):
    record_property("title", "Poland-Scheraga transition order by loop exponent")
    labels = {}
    for c in (0.5, 1.5, 2.5):
        suite = nt_suite(build_preset("poland-scheraga", dict(a=0, b=0, c=c, eps=0)))
        labels[c] = suite.label
        if c == 1.5:
            assert suite.w_c == 0.0
        if c == 2.5:
            z15, z25 = riemann_zeta(1.5), riemann_zeta(2.5)
            assert suite.w_c == pytest.approx((1 + z25) / (1 + z15 + z25), abs=1e-8)
    assert labels == {0.5: "none", 1.5: "continuous", 2.5: "discontinuous"}


def test_criterion_5_criticality(record_property):
    record_property("title", "critical flat piece and subexponential deviations")
    m = zeta_model(2.5)
    rep = criticality(m)
    assert rep.is_critical
    solver = RateSolver(m)
    for w in np.linspace(0.0, W_C, 11):
        assert abs(solver.rate([w]).value) <= 1e-9
    assert solver.rate([W_C + 0.05]).value > 0
    ts = [500, 1000, 2000, 4000]
    crit = [r.rate for r in deviation_probability(m, ts, W_C / 2)]
    assert all(b < a for a, b in zip(crit, crit[1:]))
    assert crit[-1] < 0.25 * crit[0]
    geo = [r.rate for r in deviation_probability(geometric(), ts, W_C / 2)]
    assert min(geo) > 0.005


def _fd_grad(m, k, h=1e-5):
    g = np.empty(m.dim)
    for i in range(m.dim):
        e = np.zeros(m.dim)
        e[i] = h
        g[i] = (z_value(m, k + e) - z_value(m, k - e)) / (2 * h)
    return g


def _convex_case(seed):
    """Failure labels for one random model and tilt off Theta, or None if no such tilt."""
    rng = np.random.default_rng(seed)
    dim = 2 if seed % 4 == 0 else 1
    m = random_model(rng, dim=dim, integer=False)
    for _ in range(50):
        k = rng.normal(0, 0.6, dim)
        pt = free_energy(m, k)
        if not pt.in_theta:
            break
    else:
        return None
    fails = []
    v, J = pt.nu, pt.hessian
    if np.linalg.norm(v - _fd_grad(m, k)) > 1e-6 * (1 + np.linalg.norm(v)):
        fails.append("gradient")
    fd = np.empty_like(J)
    for i in range(dim):
        e = np.zeros(dim)
        e[i] = 1e-5
        fd[:, i] = (nu(m, k + e) - nu(m, k - e)) / 2e-5
    if np.abs(J - fd).max() > 1e-5 * (1 + np.abs(J).max()):
        fails.append("hessian")
    if not np.allclose(J, J.T, atol=1e-14) or np.linalg.eigvalsh(J).min() < -1e-12 * (1 + np.abs(J).max()):
        fails.append("psd")
    k2 = rng.normal(0, 1, dim)
    if z_value(m, 0.5 * (k + k2)) > 0.5 * (pt.z + z_value(m, k2)) + 1e-12:
        fails.append("z convexity")
    solver = RateSolver(m)
    I = solver.rate(v).value
    want = float(v @ k) - pt.z + solver.z0
    if abs(I - want) > 1e-9 * (1 + abs(want)):
        fails.append("duality closure")
    for kk in rng.normal(0, 1, (3, dim)):
        if I < solver.dual_value(v, kk) - 1e-9:
            fails.append("fenchel-young")
    pt2 = free_energy(m, k2, with_hessian=False)
    if not pt2.in_theta:
        mid = solver.rate(0.5 * (v + pt2.nu)).value
        if mid > 0.5 * (I + solver.rate(pt2.nu).value) + 1e-9:
            fails.append("I convexity")
    return fails


def test_criterion_6_convex_analysis_suite(record_property):
    record_property("title", "convex-analysis invariants over 200 random cases")
    start = time.perf_counter()
    done, bad, seed = 0, [], 0
    while done < 200:
        out = _convex_case(seed)
        seed += 1
        if out is None:
            continue
        done += 1
        if out:
            bad.append((seed - 1, out))
    assert not bad, bad
    assert time.perf_counter() - start < 60.0


def test_criterion_7_sampler_exactness(record_property):
    record_property("title", "sampler chi-square at t=50 and seeded reproducibility")
    m, t, n = geometric(), 50, 100_000
    counts = sample_counts(m, t, n, seed=7)
    d = dist_W(m, t)
    obs = np.array([np.sum(counts == v) for v in d.values], dtype=float)
    exp = d.prob * n
    keep = exp >= 5
    obs_b = np.append(obs[keep], obs[~keep].sum())
    exp_b = np.append(exp[keep], exp[~keep].sum())
    exp_b *= obs_b.sum() / exp_b.sum()
    assert stats.chisquare(obs_b, exp_b).pvalue > 0.001
    again = sample_counts(m, t, n, seed=7)
    threaded = sample_counts(m, t, n, seed=7, workers=4)
    assert counts.tobytes() == again.tobytes() == threaded.tobytes()


def test_criterion_8_kingman(record_property):
    record_property("title", "multi-time renewal probabilities factorize")
    rng = np.random.default_rng(8)
    pairs = []
    while len(pairs) < 50:
        a, b = sorted(int(x) for x in rng.integers(1, 300, 2))
        if a != b:
            pairs.append((a, b))
    for model in (zeta_model(2.5), make_poland_scheraga(0.1, 0.2, 1.7, 0.3).model()):
        assert kingman_check(model.base, pairs) <= 1e-12


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q"]))
