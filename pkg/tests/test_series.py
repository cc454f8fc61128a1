import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import random_model, riemann_zeta
from renewal_ldp.model import PinningModel, RewardSpec, WeightModel, dirac, geometric, zeta_model
from renewal_ldp.series import (
    SeriesDomainError,
    grand_moment,
    grand_sum,
    in_theta,
    log_grand_sum,
    polylog,
    theta,
)
from renewal_ldp._tailsum import power_tail_sum

seeds = st.integers(0, 2**32 - 1)


def test_polylog_geometric():
    assert polylog(0.0, 0.5).value == pytest.approx(1.0, abs=1e-15)


def test_polylog_zeta_five_halves():
    v = polylog(2.5, 1.0)
    assert v.value == pytest.approx(1.3414872572509, abs=1e-12)
    assert v.value == pytest.approx(riemann_zeta(2.5), abs=1e-13)
    assert v.abs_error < 1e-12


def test_polylog_negative_order():
    assert polylog(-1.0, 0.5).value == pytest.approx(2.0, abs=1e-14)


def test_polylog_domain():
    with pytest.raises(SeriesDomainError):
        polylog(2.0, 1.5)


def test_polylog_divergent_at_one():
    assert math.isinf(polylog(1.0, 1.0).value)


@pytest.mark.parametrize("order, x", [(0.5, 0.9), (1.5, 0.999), (-2.0, 0.99), (3.0, 0.3)])
def test_polylog_against_brute_force(order, x):
    s = np.arange(1, 1_000_001, dtype=float)
    brute = float(np.sum(s**-order * x**s))
    assert polylog(order, x).value == pytest.approx(brute, rel=1e-10)


@pytest.mark.parametrize("mu, b, lam, start", [(2.5, 1, 0.0, 10), (0.0, 2, 0.01, 3), (1.2, 0, 1e-3, 7)])
def test_tail_sum_with_logs_against_brute_force(mu, b, lam, start):
    u = np.arange(start, start + 4_000_000, dtype=float)
    brute = float(np.sum(u**-mu * np.log(u) ** b * np.exp(-lam * u)))
    val, err, _ = power_tail_sum(mu, b, lam, start)
    if lam == 0.0:
        # brute force misses the slowly decaying remainder; bound it by the integral
        N = start + 4_000_000
        remainder = math.log(N) ** b * N ** (1 - mu) / (mu - 1) * (1 + 4 / math.log(N))
        assert brute <= val <= brute + remainder
    else:
        assert val == pytest.approx(brute, rel=1e-10)


def test_normalized_tail_sum():
    val, _, _ = power_tail_sum(1.5, 1, 0.2, 40)
    norm, _, _ = power_tail_sum(1.5, 1, 0.2, 40, True)
    assert norm * 40**-1.5 * math.exp(-0.2 * 40) == pytest.approx(val, rel=1e-13)


class TestGrandSum:
    def test_geometric_at_zero(self):
        assert grand_sum(geometric(), [0.0], 0.0).value == pytest.approx(1.0, abs=1e-14)

    def test_geometric_at_root(self):
        zeta = math.log((1 + math.e) / 2)
        assert grand_sum(geometric(), [1.0], zeta).value == pytest.approx(1.0, abs=1e-14)

    def test_divergent_below_edge(self):
        assert math.isinf(grand_sum(geometric(), [0.0], -1.0).value)

    @given(seeds)
    @settings(max_examples=25, deadline=None)
    def test_upper_bound_root(self, seed):
        rng = np.random.default_rng(seed)
        m = random_model(rng, dim=int(rng.integers(1, 3)), integer=False)
        k = rng.normal(0, 1, m.dim)
        bound = m.weights.z_o + m.M * float(np.linalg.norm(k)) + math.log(2)
        assert grand_sum(m, k, bound).value <= 1.0 + 1e-12


class TestGrandMoment:
    def test_zero_order_is_grand_sum(self):
        m = zeta_model(2.5)
        assert grand_moment(m, [0.3], 0.5).value == grand_sum(m, [0.3], 0.5).value

    def test_geometric_mean(self):
        assert grand_moment(geometric(), [0.0], 0.0, n=1).value == pytest.approx(2.0, abs=1e-14)

    def test_zeta_first_moment(self):
        v = grand_moment(zeta_model(2.5), [0.0], 0.0, n=1).value
        assert v == pytest.approx(riemann_zeta(1.5) / riemann_zeta(2.5), rel=1e-12)

    def test_reward_moment_brute_force(self):
        m = PinningModel(WeightModel([0.3, 0.2, 0.1]), RewardSpec([[1.0, 0.0], [0.5, 2.0], [3.0, -1.0]],
                                                                  [0.0, 0.0], [0.0, 0.0], [0.0, 0.0]))
        k, zeta = np.array([0.2, -0.1]), 0.3
        s = np.arange(1, 4)
        f = m.rewards.head
        c = np.exp(f @ k) * m.weights.head * np.exp(-zeta * s)
        want = float(np.sum(f[:, 0] ** 2 * f[:, 1] * s * c))
        assert grand_moment(m, k, zeta, (2, 1), 1).value == pytest.approx(want, rel=1e-14)

    def test_bad_multi_index(self):
        with pytest.raises(SeriesDomainError):
            grand_moment(geometric(), [0.0], 0.0, m=(1, 1))

    @given(seeds)
    @settings(max_examples=25, deadline=None)
    def test_first_moment_is_minus_derivative(self, seed):
        rng = np.random.default_rng(seed)
        m = random_model(rng, integer=False)
        k = rng.normal(0, 0.5, m.dim)
        zeta = m.weights.z_o + m.M * float(np.linalg.norm(k)) + 0.5
        h = 1e-5
        fd = -(grand_sum(m, k, zeta + h).value - grand_sum(m, k, zeta - h).value) / (2 * h)
        assert grand_moment(m, k, zeta, n=1).value == pytest.approx(fd, rel=1e-6)


class TestTheta:
    def test_finite_support(self):
        m = dirac()
        assert math.isinf(theta(m, [0.0]).value)
        assert not in_theta(m, [-5.0])

    @pytest.mark.parametrize("k, beta", [(0.0, 0.0), (-0.5, 0.2), (-1.0, -0.3)])
    def test_zeta_exponential(self, k, beta):
        # beta_c = 0 for the normalized zeta law
        m = zeta_model(2.5, beta)
        assert theta(m, [k]).value == pytest.approx(math.exp(k + beta), rel=1e-12)

    def test_geometric_divergent(self):
        assert math.isinf(theta(geometric(), [0.0]).value)


@given(seeds)
@settings(max_examples=30, deadline=None)
def test_grand_sum_decreasing_and_log_convex(seed):
    rng = np.random.default_rng(seed)
    m = random_model(rng, dim=int(rng.integers(1, 3)), integer=False)
    k1, k2 = rng.normal(0, 0.5, (2, m.dim))
    base = m.weights.z_o + m.M * max(np.linalg.norm(k1), np.linalg.norm(k2)) + 0.1
    z1, z2 = base + rng.uniform(0, 1, 2)
    assert grand_sum(m, k1, z1 + 0.1).value < grand_sum(m, k1, z1).value
    mid = log_grand_sum(m, 0.5 * (k1 + k2), 0.5 * (z1 + z2))
    assert mid <= 0.5 * (log_grand_sum(m, k1, z1) + log_grand_sum(m, k2, z2)) + 1e-12
