import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from conftest import random_model, riemann_zeta
from renewal_ldp.exact import NoPath, dist_W
from renewal_ldp.model import PinningModel, RewardSpec, WeightModel, dirac, geometric, make_poland_scheraga, zeta_model
from renewal_ldp.sampler import RNG_FAMILY, deviation_probability, sample_counts, sample_path, sample_rewards

W_C = riemann_zeta(2.5) / riemann_zeta(1.5)


def _pooled_chisquare(observed_counts, values, probs, n):
    """Chi-square p-value after pooling cells with expected count below 5."""
    obs = np.array([observed_counts.get(int(v), 0) for v in values], dtype=float)
    exp = probs * n
    order = np.argsort(values)
    obs, exp = obs[order], exp[order]
    bins_o, bins_e, acc_o, acc_e = [], [], 0.0, 0.0
    for o, e in zip(obs, exp):
        acc_o += o
        acc_e += e
        if acc_e >= 5:
            bins_o.append(acc_o)
            bins_e.append(acc_e)
            acc_o = acc_e = 0.0
    bins_o[-1] += acc_o
    bins_e[-1] += acc_e
    bins_e = np.array(bins_e) * sum(bins_o) / sum(bins_e)
    return stats.chisquare(bins_o, bins_e).pvalue


class TestPaths:
    def test_dirac(self):
        p = sample_path(dirac(), 12, seed=3)
        assert p.waiting_times == (1,) * 12
        assert p.rewards_total[0] == 12.0

    @given(st.integers(0, 2**32 - 1), st.integers(1, 60))
    @settings(max_examples=40, deadline=None)
    def test_path_invariants(self, seed, t):
        rng = np.random.default_rng(seed)
        m = random_model(rng, dim=2, integer=False)
        try:
            p = sample_path(m, t, seed)
        except NoPath:
            return
        assert sum(p.waiting_times) == t
        assert np.allclose(p.rewards_total, m.reward_values(np.array(p.waiting_times)).sum(axis=0),
                           rtol=1e-12, atol=1e-12)

    def test_seed_determinism(self):
        m = zeta_model(2.5, 0.3)
        assert sample_path(m, 200, 17).waiting_times == sample_path(m, 200, 17).waiting_times
        assert sample_path(m, 200, 17).waiting_times != sample_path(m, 200, 18).waiting_times

    def test_no_path(self):
        m = PinningModel(WeightModel([0.0, 1.0]), RewardSpec.constant(2))
        with pytest.raises(NoPath):
            sample_path(m, 7, 0)


class TestDistribution:
    def test_chi_square_geometric(self):
        t, n = 50, 100_000
        counts = sample_counts(geometric(), t, n, seed=2024)
        d = dist_W(geometric(), t)
        vals, freq = np.unique(counts, return_counts=True)
        p = _pooled_chisquare(dict(zip(vals.tolist(), freq.tolist())), d.values, d.prob, n)
        assert p > 0.001

    def test_chi_square_zeta(self):
        t, n = 50, 50_000
        m = zeta_model(2.5, 0.2)
        counts = sample_counts(m, t, n, seed=99)
        d = dist_W(m, t)
        vals, freq = np.unique(counts, return_counts=True)
        assert _pooled_chisquare(dict(zip(vals.tolist(), freq.tolist())), d.values, d.prob, n) > 0.001

    def test_worker_independence(self):
        m = geometric(0.4)
        a = sample_rewards(m, 80, 25_000, seed=5, workers=1)
        b = sample_rewards(m, 80, 25_000, seed=5, workers=4)
        assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])

    def test_monte_carlo_within_four_standard_errors(self):
        m = zeta_model(2.5, -0.1)
        t, n = 300, 20_000
        W = sample_rewards(m, t, n, seed=11)[1][:, 0]
        d = dist_W(m, t)
        for cut in (0.2, 0.4, 0.6):
            p = float(np.sum(d.prob[d.values / t >= cut]))
            est = float(np.mean(W / t >= cut))
            se = math.sqrt(max(p * (1 - p), 1e-12) / n)
            assert abs(est - p) <= 4 * se

    def test_critical_sample_mean(self):
        m = zeta_model(2.5)
        t, n = 2000, 2000
        x = sample_counts(m, t, n, seed=8) / t
        d = dist_W(m, t)
        mean = float(np.sum(d.prob * d.values / t))
        sd = math.sqrt(float(np.sum(d.prob * (d.values / t - mean) ** 2)))
        assert abs(x.mean() - mean) <= 4 * sd / math.sqrt(n)
        assert abs(x.mean() - W_C) < 0.05


class TestDeviation:
    def test_geometric_exponential_decay(self):
        ts = [100, 200, 400, 800]
        rows = deviation_probability(geometric(), ts, 0.1)
        assert all(r.method == "exact" for r in rows)
        slope = np.polyfit(ts, [math.log(r.estimate) for r in rows], 1)[0]
        assert slope < -0.005

    def test_dirac_zero(self):
        rows = deviation_probability(dirac(), [10, 50], 0.01)
        assert [r.estimate for r in rows] == [0.0, 0.0]

    def test_critical_subexponential(self):
        ts = [500, 1000, 2000, 4000]
        rows = deviation_probability(zeta_model(2.5), ts, W_C / 2)
        rates = [r.rate for r in rows]
        assert all(b < a for a, b in zip(rates, rates[1:]))
        # polynomial decay: the rate shrinks like log(t)/t instead of levelling off
        assert rates[-1] < 0.25 * rates[0]
        geo = deviation_probability(geometric(), ts, W_C / 2)
        assert min(r.rate for r in geo) > 0.005

    def test_monte_carlo_branch(self):
        m = make_poland_scheraga(0.1, 0.2, 2.1, 0.3).model("loop_entropy")
        rows = deviation_probability(m, [60], 0.2, n_samples=4000, seed=1)
        r = rows[0]
        assert r.method == "mc"
        assert r.ci_low <= r.estimate <= r.ci_high

    def test_rng_family_recorded(self):
        assert RNG_FAMILY == "numpy.random.Philox"
