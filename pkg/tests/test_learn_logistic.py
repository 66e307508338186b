import math

import numpy as np
import pytest
from scipy.special import expit

from pqscreen.learn import (
    LearnError,
    LogisticModel,
    fit_logistic,
    goodness_of_fit,
    logistic_gradient,
    logistic_log_likelihood,
    logistic_score,
)


def simulate(beta, intercept, n, seed):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, len(beta)))
    p = expit(X @ np.asarray(beta) + intercept)
    y = (rng.random(n) < p).astype(int)
    return X, y


class TestFitLogistic:
    def test_recovers_known_coefficients(self):
        beta, intercept = [1.0, -0.5], 0.25
        X, y = simulate(beta, intercept, 20_000, seed=3)
        m = fit_logistic(X, y)
        np.testing.assert_allclose(m.coefficients, beta, atol=0.1)
        assert m.intercept == pytest.approx(intercept, abs=0.1)

    def test_score_vector_small_at_optimum(self):
        X, y = simulate([0.8, -1.2, 0.3], -0.4, 5000, seed=5)
        m = fit_logistic(X, y)
        g = logistic_gradient(X, y, m.coefficients, m.intercept)
        assert np.max(np.abs(g)) < 1e-6

    def test_gradient_matches_finite_differences(self):
        X, y = simulate([0.5, -0.7], 0.1, 400, seed=11)
        rng = np.random.default_rng(2)
        for _ in range(5):
            beta = rng.normal(size=2)
            b0 = rng.normal()
            g = logistic_gradient(X, y, beta, b0)
            h = 1e-6
            fd = np.empty(3)
            for j in range(2):
                bp, bm = beta.copy(), beta.copy()
                bp[j] += h
                bm[j] -= h
                fd[j] = (
                    logistic_log_likelihood(X, y, bp, b0)
                    - logistic_log_likelihood(X, y, bm, b0)
                ) / (2 * h)
            fd[2] = (
                logistic_log_likelihood(X, y, beta, b0 + h)
                - logistic_log_likelihood(X, y, beta, b0 - h)
            ) / (2 * h)
            np.testing.assert_allclose(g, fd, rtol=1e-4, atol=1e-4)

    def test_null_relationship(self):
        rng = np.random.default_rng(8)
        X = rng.normal(size=(4000, 3))
        y = np.tile([0, 1], 2000)
        m = fit_logistic(X, y)
        assert abs(m.intercept) < 0.1
        assert np.all(np.abs(m.coefficients) < 0.1)

    def test_constant_column_warns(self):
        X, y = simulate([1.0], 0.0, 500, seed=1)
        X = np.hstack([X, np.ones((500, 1))])
        with pytest.warns(UserWarning, match="constant"):
            fit_logistic(X, y)

    def test_separation_flag(self):
        X = np.linspace(-1, 1, 100).reshape(-1, 1)
        y = (X[:, 0] > 0).astype(int)
        m = fit_logistic(X, y)
        assert m.separation_warning

    def test_single_class_errors(self):
        with pytest.raises(LearnError):
            fit_logistic(np.ones((5, 2)), np.ones(5, dtype=int))


class TestLogisticScore:
    def test_contributions_sum(self):
        m = LogisticModel(coefficients=np.array([0.5, -2.0, 1.25]), intercept=0.75)
        p, linear, contribs = logistic_score(m, [1.0, 2.0, 3.0])
        assert contribs.sum() == pytest.approx(linear - m.intercept, abs=1e-12)
        assert p == pytest.approx(1.0 / (1.0 + math.exp(-linear)))

    def test_dimension_mismatch(self):
        m = LogisticModel(coefficients=np.array([0.5]), intercept=0.0)
        with pytest.raises(LearnError):
            logistic_score(m, [1.0, 2.0])


class TestGoodnessOfFit:
    def test_null_model_zero(self):
        rng = np.random.default_rng(4)
        X = rng.normal(size=(200, 3))
        y = np.tile([0, 1, 1, 0], 50)
        base_rate = y.mean()
        null = LogisticModel(
            coefficients=np.zeros(3),
            intercept=math.log(base_rate / (1 - base_rate)),
        )
        d = goodness_of_fit(null, X, y)
        assert d.model_chi_square == 0.0
        assert d.cox_snell_r2 == 0.0
        assert d.nagelkerke_r2 == 0.0

    def test_closed_form_cox_snell(self):
        # n=100 balanced: LL_null = -69.3147; model at half the deviance
        # gives Cox-Snell = 1 - exp(-0.693) ~ 0.50
        n = 100
        ll_null = n * math.log(0.5)
        ll_model = ll_null / 2.0
        cs = 1.0 - math.exp((2.0 / n) * (ll_null - ll_model))
        assert cs == pytest.approx(0.50, abs=1e-3)

    def test_near_separation_high_r2(self):
        X = np.linspace(-2, 2, 400).reshape(-1, 1)
        rng = np.random.default_rng(0)
        y = (X[:, 0] + rng.normal(0, 0.1, 400) > 0).astype(int)
        m = fit_logistic(X, y)
        d = goodness_of_fit(m, X, y)
        assert d.nagelkerke_r2 > 0.95
        assert d.nagelkerke_r2 >= d.cox_snell_r2

    def test_nagelkerke_dominates_cox_snell(self):
        for seed in range(5):
            X, y = simulate([0.4, -0.9], 0.2, 600, seed=seed)
            m = fit_logistic(X, y)
            d = goodness_of_fit(m, X, y)
            assert 0.0 <= d.cox_snell_r2 <= d.nagelkerke_r2 <= 1.0
