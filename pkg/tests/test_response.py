import numpy as np
import pytest
from scipy.stats import norm

from audiogp import (log_likelihood, log_likelihood_grad,
                     log_likelihood_hess_diag, response_probability)


def random_draws(n, seed=0, z_limit=6.0):
    """Random (y, h, g, sigma_p) with |h - g| <= z_limit * sigma_p."""
    rng = np.random.default_rng(seed)
    y = rng.choice([-1.0, 1.0], n)
    sp = rng.uniform(0.5, 6.0, n)
    g = rng.uniform(-20.0, 80.0, n)
    h = g + rng.uniform(-z_limit, z_limit, n) * sp
    return y, h, g, sp


class TestResponseProbability:
    def test_at_threshold_is_half(self):
        assert response_probability(1, 40.0, 40.0, 2.0) == pytest.approx(0.5)

    def test_one_sigma_above(self):
        p = response_probability(1, 42.0, 40.0, 2.0)
        assert p == pytest.approx(norm.cdf(1.0), abs=1e-12)
        assert p == pytest.approx(0.841345, abs=1e-6)

    def test_labels_sum_to_one(self):
        y, h, g, sp = random_draws(500, seed=1)
        for hi, gi, si in zip(h, g, sp):
            total = (response_probability(1, hi, gi, si)
                     + response_probability(-1, hi, gi, si))
            assert total == pytest.approx(1.0, abs=1e-12)

    def test_monotone_in_level(self):
        # restrict to |z| <= 8 where successive CDF values are still
        # distinguishable in float64
        levels = np.linspace(16.0, 64.0, 400)
        p = response_probability(np.ones_like(levels), levels, 40.0, 3.0)
        assert np.all(np.diff(p) > 0)

    def test_bad_sigma(self):
        with pytest.raises(ValueError):
            response_probability(1, 40.0, 40.0, 0.0)
        with pytest.raises(ValueError):
            response_probability(1, 40.0, 40.0, -2.0)

    def test_bad_label(self):
        with pytest.raises(ValueError):
            response_probability(0, 40.0, 40.0, 2.0)


class TestLogLikelihood:
    def test_single_trial_at_threshold(self):
        assert log_likelihood([1.0], [30.0], [30.0], 2.0) == pytest.approx(np.log(0.5))

    def test_factorizes_over_trials(self):
        y, h, g, sp = random_draws(2, seed=2)
        sp0 = 2.5
        joint = log_likelihood(y, h, g, sp0)
        parts = sum(log_likelihood([yi], [hi], [gi], sp0) for yi, hi, gi in zip(y, h, g))
        assert joint == pytest.approx(parts, rel=1e-12)

    def test_label_flip_probabilities_sum_to_one(self):
        y, h, g, _ = random_draws(200, seed=3)
        for hi, gi in zip(h, g):
            lp_pos = log_likelihood([1.0], [hi], [gi], 2.0)
            lp_neg = log_likelihood([-1.0], [hi], [gi], 2.0)
            assert np.exp(lp_pos) + np.exp(lp_neg) == pytest.approx(1.0, abs=1e-12)

    def test_always_nonpositive(self):
        y, h, g, sp = random_draws(1000, seed=4)
        for i in range(0, 1000, 50):
            assert log_likelihood(y[: i + 1], h[: i + 1], g[: i + 1], 2.0) <= 0.0

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            log_likelihood([1.0, 1.0], [30.0], [30.0], 2.0)


class TestDerivatives:
    def test_grad_at_threshold(self):
        # -(1/sigma) * phi(0)/Phi(0) = -2 phi(0) / sigma
        for sp in (0.5, 2.0, 7.0):
            got = log_likelihood_grad([1.0], [30.0], [30.0], sp)[0]
            assert got == pytest.approx(-2.0 * norm.pdf(0.0) / sp, rel=1e-12)
            assert got == pytest.approx(-0.7978845608 / sp, rel=1e-8)

    def test_grad_sign_for_positive_label(self):
        y, h, g, sp = random_draws(1000, seed=5)
        grad = log_likelihood_grad(np.ones_like(y), h, g, 2.0)
        assert np.all(grad < 0)

    def test_grad_matches_finite_differences(self):
        y, h, g, sp = random_draws(1000, seed=6)
        eps = 1e-6
        for i in range(1000):
            grad = log_likelihood_grad(y[i : i + 1], h[i : i + 1], g[i : i + 1], sp[i])[0]
            up = log_likelihood(y[i : i + 1], h[i : i + 1], g[i : i + 1] + eps, sp[i])
            dn = log_likelihood(y[i : i + 1], h[i : i + 1], g[i : i + 1] - eps, sp[i])
            fd = (up - dn) / (2 * eps)
            assert grad == pytest.approx(fd, rel=1e-6, abs=1e-10)

    def test_hess_matches_finite_differences_of_grad(self):
        y, h, g, sp = random_draws(1000, seed=7)
        eps = 1e-6
        for i in range(1000):
            hess = log_likelihood_hess_diag(y[i : i + 1], h[i : i + 1], g[i : i + 1], sp[i])[0]
            up = log_likelihood_grad(y[i : i + 1], h[i : i + 1], g[i : i + 1] + eps, sp[i])[0]
            dn = log_likelihood_grad(y[i : i + 1], h[i : i + 1], g[i : i + 1] - eps, sp[i])[0]
            fd = (up - dn) / (2 * eps)
            assert hess == pytest.approx(fd, rel=1e-5, abs=1e-9)

    def test_hess_nonpositive_everywhere(self):
        y, h, g, sp = random_draws(1000, seed=8)
        for i in range(0, 1000, 10):
            vals = log_likelihood_hess_diag(y, h, g, sp[i])
            assert np.all(vals <= 0)

    def test_hess_label_symmetry(self):
        # hess(y=+1, h-g=delta) == hess(y=-1, h-g=-delta)
        deltas = np.linspace(-8.0, 8.0, 33)
        pos = log_likelihood_hess_diag(np.ones_like(deltas), deltas, np.zeros_like(deltas), 2.0)
        neg = log_likelihood_hess_diag(-np.ones_like(deltas), -deltas, np.zeros_like(deltas), 2.0)
        np.testing.assert_allclose(pos, neg, rtol=1e-12)


class TestTailStability:
    def test_30_sigma_tails_are_finite(self):
        for sp in (0.5, 2.0, 8.0):
            for sign in (-1.0, 1.0):
                h = np.array([50.0 + sign * 30.0 * sp])
                g = np.array([50.0])
                for y in (np.array([1.0]), np.array([-1.0])):
                    assert np.isfinite(log_likelihood(y, h, g, sp))
                    assert np.isfinite(log_likelihood_grad(y, h, g, sp)).all()
                    assert np.isfinite(log_likelihood_hess_diag(y, h, g, sp)).all()
