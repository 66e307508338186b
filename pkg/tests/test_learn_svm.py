import numpy as np
import pytest

from pqscreen.learn import LearnError, SvmModel, fit_svm, predict_score, svm_decision


def kkt_violation(model: SvmModel, X, y, include_bias=True):
    """Largest KKT violation of the dual solution on its training set."""
    y_pm = 2.0 * np.asarray(y, float) - 1.0
    decision = svm_decision(model, X)
    margins = y_pm * decision
    # reconstruct alpha per training point (non-SVs have alpha 0)
    alpha = np.zeros(len(X))
    sv_index = 0
    used = np.zeros(len(X), dtype=bool)
    for i, row in enumerate(X):
        if sv_index < len(model.support_vectors) and not used[i]:
            if np.allclose(row, model.support_vectors[sv_index]):
                alpha[i] = abs(model.dual_coefficients[sv_index])
                used[i] = True
                sv_index += 1
    worst = 0.0
    for i in range(len(X)):
        if alpha[i] <= 0:
            worst = max(worst, 1.0 - margins[i])  # must have margin >= 1
        elif alpha[i] >= model.c:
            worst = max(worst, margins[i] - 1.0)  # must have margin <= 1
        else:
            worst = max(worst, abs(margins[i] - 1.0))
    return worst


def random_problem(rng, n):
    k = int(rng.integers(2, 6))
    X = rng.normal(size=(n, k))
    w = rng.normal(size=k)
    y = (X @ w + 0.4 * rng.normal(size=n) > 0).astype(int)
    if len(np.unique(y)) < 2:
        y[0] = 1 - y[0]
    return X, y


class TestSvm:
    def test_xor_all_support_vectors(self):
        X = np.array([[0.0, 0.0], [1.0, 1.0], [0.0, 1.0], [1.0, 0.0]])
        y = np.array([0, 0, 1, 1])
        m = fit_svm(X, y, c=10.0, gamma=1.0)
        assert len(m.support_vectors) == 4
        pred = (svm_decision(m, X) >= 0).astype(int)
        np.testing.assert_array_equal(pred, y)

    def test_separable_sign_match(self):
        rng = np.random.default_rng(5)
        y = np.repeat([0, 1], 40)
        X = rng.normal(size=(80, 2)) + np.outer(2 * y - 1, [3.0, 0.0])
        m = fit_svm(X, y, c=1.0, gamma=0.05)
        decision = svm_decision(m, X)
        assert np.all((decision >= 0).astype(int) == y)

    def test_box_constraint_exact_and_sum_zero(self):
        rng = np.random.default_rng(7)
        for _ in range(10):
            X, y = random_problem(rng, 60)
            c = float(rng.choice([0.5, 1.0, 10.0]))
            m = fit_svm(X, y, c=c, gamma=0.5)
            assert np.all(np.abs(m.dual_coefficients) <= c + 0.0)
            assert abs(m.dual_coefficients.sum()) <= 1e-8

    def test_kkt_satisfied_at_tolerance(self):
        rng = np.random.default_rng(11)
        for _ in range(10):
            X, y = random_problem(rng, 50)
            m = fit_svm(X, y, c=2.0, gamma=0.3, tol=1e-3)
            # tol bounds the violating-pair gap; allow small slack on margins
            assert kkt_violation(m, X, y) <= 5e-3

    def test_duplicated_training_set_same_decision(self):
        # doubling every point doubles the slack budget, so C halves to keep
        # the primal problem identical
        rng = np.random.default_rng(13)
        X, y = random_problem(rng, 40)
        m1 = fit_svm(X, y, c=1.0, gamma=0.5, tol=1e-4)
        m2 = fit_svm(np.vstack([X, X]), np.concatenate([y, y]), c=0.5, gamma=0.5, tol=1e-4)
        q = rng.normal(size=(25, X.shape[1]))
        d1 = svm_decision(m1, q)
        d2 = svm_decision(m2, q)
        np.testing.assert_allclose(d1, d2, atol=1e-3)

    def test_decision_zero_is_boundary(self):
        X = np.array([[-1.0], [1.0]] * 10)
        y = np.array([0, 1] * 10)
        m = fit_svm(X, y, c=10.0, gamma=0.5)
        assert abs(float(svm_decision(m, np.array([[0.0]]))[0])) < 1e-6

    def test_predict_score_is_decision_value(self):
        rng = np.random.default_rng(17)
        X, y = random_problem(rng, 50)
        m = fit_svm(X, y)
        np.testing.assert_allclose(predict_score(m, X), svm_decision(m, X))

    def test_invalid_hyperparameters(self):
        X = np.array([[0.0], [1.0]])
        y = np.array([0, 1])
        with pytest.raises(LearnError):
            fit_svm(X, y, c=-1.0)
        with pytest.raises(LearnError):
            fit_svm(X, y, gamma=0.0)
