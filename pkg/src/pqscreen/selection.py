"""Feature selection: rank-sum filtering, L1-penalized logistic paths, PCA.

All selectors are fitted on training data only and return immutable
objects (a feature mask or a linear transform) that can be applied to
held-out rows without touching their labels.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .cohort import FEATURE_NAMES, Cohort
from .stats import wilcoxon_rank_sum

CD_TOL = 1e-7
CD_MAX_SWEEPS = 1000
DEFAULT_LAMBDA_POINTS = 100
DEFAULT_LAMBDA_RATIO = 1e-4
SEPARATION_COEF_LIMIT = 30.0  # standardized scale, as in the logistic fit


class SelectionError(ValueError):
    """Selector could not produce a usable feature set."""


@dataclass(frozen=True)
class FeatureMask:
    """Indices of retained features within the canonical ordering."""

    selected: tuple[int, ...]
    n_features: int = len(FEATURE_NAMES)

    def __post_init__(self):
        idx = tuple(sorted(int(i) for i in self.selected))
        object.__setattr__(self, "selected", idx)
        if len(idx) == 0:
            raise SelectionError("feature mask is empty")
        if len(set(idx)) != len(idx) or idx[0] < 0 or idx[-1] >= self.n_features:
            raise SelectionError("mask indices must be unique and within range")

    def names(self, feature_names=FEATURE_NAMES) -> tuple[str, ...]:
        return tuple(feature_names[i] for i in self.selected)

    def transform(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            return X[list(self.selected)]
        return X[:, list(self.selected)]


@dataclass(frozen=True)
class PcaTransform:
    """Centered orthonormal projection retaining a variance fraction."""

    mean: np.ndarray
    components: np.ndarray            # (m, k), rows are eigenvectors
    explained_fraction: np.ndarray    # (m,), of the total variance
    eigenvalues: np.ndarray           # (m,)
    variance_threshold: float

    def __post_init__(self):
        for name in ("mean", "components", "explained_fraction", "eigenvalues"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float))
        gram = self.components @ self.components.T
        if not np.allclose(gram, np.eye(len(self.components)), atol=1e-10):
            raise SelectionError("components must be orthonormal")
        ef = self.explained_fraction
        if np.any(np.diff(ef) > 1e-12):
            raise SelectionError("explained fractions must be non-increasing")
        if ef.sum() < self.variance_threshold - 1e-9:
            raise SelectionError("retained components fall short of the variance threshold")

    @property
    def n_components(self) -> int:
        return len(self.components)

    def transform(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        k = len(self.mean)
        if X.shape[-1] != k:
            raise SelectionError(f"expected {k} features, got {X.shape[-1]}")
        return (X - self.mean) @ self.components.T


def _cohort_matrix(train) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(train, Cohort):
        return train.X, train.y
    if isinstance(train, tuple) and len(train) == 2:
        return np.asarray(train[0], dtype=float), np.asarray(train[1], dtype=int)
    raise SelectionError("selectors operate on a Cohort or an (X, y) pair")


# ---------------------------------------------------------------------------
# Rank-sum filter
# ---------------------------------------------------------------------------

def wilcoxon_filter(train: Cohort, alpha: float = 0.05) -> FeatureMask:
    """Keep every feature whose two-sided rank-sum p-value is below alpha."""
    X, y = _cohort_matrix(train)
    if len(np.unique(y)) < 2:
        raise SelectionError("both classes must be present")
    selected = []
    for j in range(X.shape[1]):
        r = wilcoxon_rank_sum(X[y == 0, j], X[y == 1, j], mode="approx")
        if r.p_value < alpha:
            selected.append(j)
    if not selected:
        raise SelectionError("no feature discriminates the classes at this level")
    return FeatureMask(tuple(selected), n_features=X.shape[1])


# ---------------------------------------------------------------------------
# L1-penalized logistic regression (coordinate descent)
# ---------------------------------------------------------------------------

def _standardize(X: np.ndarray):
    mu = X.mean(axis=0)
    sd = X.std(axis=0)
    keep = sd > 0
    if not keep.all():
        warnings.warn("zero-variance feature(s) dropped from the penalized fit")
    Xs = (X[:, keep] - mu[keep]) / sd[keep]
    return Xs, mu, sd, keep


def lambda_max(X: np.ndarray, y: np.ndarray) -> float:
    """Smallest penalty that zeroes every coefficient of the standardized fit."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    Xs, _, _, _ = _standardize(X)
    resid = y - y.mean()
    return float(np.max(np.abs(Xs.T @ resid)) / len(y))


def default_lambda_grid(X, y) -> np.ndarray:
    lmax = lambda_max(X, y)
    return np.geomspace(lmax, lmax * DEFAULT_LAMBDA_RATIO, DEFAULT_LAMBDA_POINTS)


def _cd_l1_logistic(Xs, y, lam, beta, intercept):
    """Coordinate descent on the penalized quadratic approximation.

    Minimizes mean logistic deviance/2 plus lam*||beta||_1 with an
    unpenalized intercept. Each outer step refreshes the weighted least
    squares surrogate; the inner sweeps run on the precomputed k-by-k Gram
    matrix, so a coordinate update costs O(k). Returns (beta, intercept,
    objective trace).
    """
    n, k = Xs.shape
    sweeps = 0
    trace = []

    def objective(b, b0):
        eta = Xs @ b + b0
        nll = float(np.mean(np.logaddexp(0.0, eta) - y * eta))
        return nll + lam * float(np.abs(b).sum())

    prev_obj = objective(beta, intercept)
    trace.append(prev_obj)
    while sweeps < CD_MAX_SWEEPS:
        eta = Xs @ beta + intercept
        p = expit(eta)
        w = np.maximum(p * (1.0 - p), 1e-6)
        z = eta + (y - p) / w
        wn = w / n
        Xw = Xs * wn[:, None]
        M = Xs.T @ Xw               # weighted Gram, (k, k)
        q = Xw.T @ z                # weighted feature-response products
        s = Xw.sum(axis=0)          # weighted feature sums
        sw = float(wn.sum())
        qz = float(wn @ z)
        Mbeta = M @ beta
        outer_beta = beta.copy()
        outer_b0 = intercept
        inner_sweeps = 0
        while sweeps < CD_MAX_SWEEPS and inner_sweeps < 20:
            sweeps += 1
            inner_sweeps += 1
            max_change = 0.0
            for j in range(k):
                bj = beta[j]
                rho = q[j] - intercept * s[j] - Mbeta[j] + M[j, j] * bj
                new = math.copysign(max(abs(rho) - lam, 0.0), rho) / M[j, j]
                if new != bj:
                    Mbeta += M[:, j] * (new - bj)
                    beta[j] = new
                    max_change = max(max_change, abs(new - bj))
            b0_new = (qz - float(s @ beta)) / sw
            max_change = max(max_change, abs(b0_new - intercept))
            intercept = b0_new
            if max_change < CD_TOL:
                break
        # the quadratic model can overshoot the true objective: backtrack
        obj = objective(beta, intercept)
        if obj > prev_obj + 1e-15:
            step = 1.0
            for _ in range(30):
                step *= 0.5
                beta_t = outer_beta + step * (beta - outer_beta)
                b0_t = outer_b0 + step * (intercept - outer_b0)
                obj_t = objective(beta_t, b0_t)
                if obj_t <= prev_obj + 1e-15:
                    beta, intercept, obj = beta_t, b0_t, obj_t
                    break
            else:
                beta, intercept, obj = outer_beta, outer_b0, prev_obj
                trace.append(obj)
                break
        trace.append(obj)
        outer_change = max(
            float(np.max(np.abs(beta - outer_beta))), abs(intercept - outer_b0)
        )
        flat = prev_obj - obj < 1e-11
        prev_obj = obj
        if outer_change < CD_TOL or flat:
            break
        if np.max(np.abs(beta)) > SEPARATION_COEF_LIMIT:
            break  # quasi-separated at this penalty; coefficients diverge
    beta[np.abs(beta) < 1e-10] = 0.0  # rounding remnants at the threshold boundary
    return beta, intercept, trace


def lasso_path(X, y, lambdas) -> tuple[np.ndarray, np.ndarray]:
    """Raw-scale coefficients and intercepts along a descending lambda path."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    Xs, mu, sd, keep = _standardize(X)
    k_all = X.shape[1]
    lambdas = np.asarray(lambdas, dtype=float)
    beta = np.zeros(Xs.shape[1])
    p0 = y.mean()
    intercept = math.log(p0 / (1.0 - p0))
    coefs = np.zeros((len(lambdas), k_all))
    intercepts = np.zeros(len(lambdas))
    for i, lam in enumerate(lambdas):
        beta, intercept, _ = _cd_l1_logistic(Xs, y, float(lam), beta, intercept)
        raw = np.zeros(k_all)
        raw[keep] = beta / sd[keep]
        coefs[i] = raw
        intercepts[i] = intercept - float((beta / sd[keep]) @ mu[keep])
    return coefs, intercepts


def _binomial_deviance(X, y, coef, intercept) -> float:
    eta = X @ coef + intercept
    return 2.0 * float(np.mean(np.logaddexp(0.0, eta) - y * eta))


def lasso_select(
    train: Cohort,
    lambda_grid=None,
    folds: int = 10,
    seed: int = 0,
) -> FeatureMask:
    """Cross-validated L1 logistic selection.

    Fits the penalty path by coordinate descent, picks the lambda with the
    smallest mean cross-validated deviance, refits on the full training
    data, and returns the features with nonzero coefficients.
    """
    X, y = _cohort_matrix(train)
    if len(np.unique(y)) < 2:
        raise SelectionError("both classes must be present")
    y = y.astype(float)
    if lambda_grid is None:
        lambda_grid = default_lambda_grid(X, y)
    lambda_grid = np.sort(np.asarray(lambda_grid, dtype=float))[::-1]
    if len(lambda_grid) == 0:
        raise SelectionError("lambda grid is empty")

    rng = np.random.default_rng(seed)
    folds = max(2, min(folds, len(y)))
    assignment = np.empty(len(y), dtype=int)
    for cls in (0, 1):
        idx = np.where(y == cls)[0]
        idx = rng.permutation(idx)
        assignment[idx] = np.arange(len(idx)) % folds

    deviance = np.zeros(len(lambda_grid))
    for f in range(folds):
        val = assignment == f
        coefs, intercepts = lasso_path(X[~val], y[~val], lambda_grid)
        for i in range(len(lambda_grid)):
            deviance[i] += _binomial_deviance(X[val], y[val], coefs[i], intercepts[i]) * val.sum()
    deviance /= len(y)

    best = int(np.argmin(deviance))
    coefs, _ = lasso_path(X, y, lambda_grid[: best + 1])
    nonzero = np.where(coefs[best] != 0.0)[0]
    if len(nonzero) == 0:
        raise SelectionError("every lambda in the grid zeroed all coefficients")
    return FeatureMask(tuple(int(i) for i in nonzero), n_features=X.shape[1])


# ---------------------------------------------------------------------------
# Principal component analysis
# ---------------------------------------------------------------------------

def pca_fit(train, variance_threshold: float = 0.99) -> PcaTransform:
    """Eigendecomposition of the (uncentered-feature, unscaled) covariance.

    Retains the smallest prefix of descending-eigenvalue components whose
    cumulative explained variance reaches the threshold.
    """
    X = train.X if isinstance(train, Cohort) else np.asarray(train, dtype=float)
    if len(X) < 2:
        raise SelectionError("PCA needs at least 2 observations")
    if not (0.0 < variance_threshold <= 1.0):
        raise SelectionError("variance threshold must lie in (0, 1]")
    mean = X.mean(axis=0)
    cov = np.cov(X.T, ddof=1)
    cov = np.atleast_2d(cov)
    evals, evecs = np.linalg.eigh(cov)
    order = np.argsort(evals)[::-1]
    evals = evals[order]
    if np.any(evals < -1e-10):
        raise SelectionError("covariance matrix is not positive semidefinite")
    evals = np.maximum(evals, 0.0)
    evecs = evecs[:, order]
    total = evals.sum()
    if total <= 0.0:
        raise SelectionError("data has zero total variance")
    fractions = evals / total
    cum = np.cumsum(fractions)
    m = int(np.searchsorted(cum, variance_threshold - 1e-12) + 1)
    m = min(m, len(evals))
    return PcaTransform(
        mean=mean,
        components=evecs[:, :m].T,
        explained_fraction=fractions[:m],
        eigenvalues=evals[:m],
        variance_threshold=variance_threshold,
    )


def pca_apply(transform: PcaTransform, x) -> np.ndarray:
    """Project a vector or matrix onto the retained components."""
    return transform.transform(x)
