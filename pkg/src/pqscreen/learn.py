"""The four classifiers, trained from first principles.

Logistic regression is fitted by iteratively reweighted least squares,
random forests by bootstrapped Gini trees with out-of-bag error tracking,
boosted trees by AdaBoost with depth-limited stumps, and the SVM by
sequential minimal optimization of the RBF-kernel dual. Every fitted model
is immutable and scores through :func:`predict_score` with a monotone
PD-risk score.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import chdtrc, expit

from .trees import BinnedDesign, Tree, grow_tree

SEPARATION_COEF_LIMIT = 30.0


class LearnError(ValueError):
    """Invalid training input or failed fit."""


def _check_training_data(X, y):
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=int)
    if X.ndim != 2 or len(X) != len(y):
        raise LearnError("X must be (n, k) with matching y")
    if not np.isfinite(X).all():
        raise LearnError("X contains non-finite entries")
    if len(np.unique(y)) < 2:
        raise LearnError("training data must contain both classes")
    if not np.all(np.isin(y, (0, 1))):
        raise LearnError("labels must be 0 or 1")
    return X, y


# ---------------------------------------------------------------------------
# Logistic regression
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LogisticModel:
    coefficients: np.ndarray
    intercept: float
    feature_names: tuple[str, ...] | None = None
    separation_warning: bool = False

    def __post_init__(self):
        coefs = np.asarray(self.coefficients, dtype=float)
        object.__setattr__(self, "coefficients", coefs)
        if not (np.isfinite(coefs).all() and math.isfinite(self.intercept)):
            raise LearnError("logistic model values must be finite")
        if self.feature_names is not None and len(self.feature_names) != len(coefs):
            raise LearnError("coefficient count must match feature_names")

    @property
    def n_features(self) -> int:
        return len(self.coefficients)


@dataclass(frozen=True)
class FitDiagnostics:
    model_chi_square: float
    df: int
    p_value: float
    cox_snell_r2: float
    nagelkerke_r2: float


def logistic_log_likelihood(X, y, coefficients, intercept) -> float:
    eta = np.asarray(X, float) @ np.asarray(coefficients, float) + intercept
    y = np.asarray(y, float)
    return float(np.sum(y * eta - np.logaddexp(0.0, eta)))


def logistic_gradient(X, y, coefficients, intercept) -> np.ndarray:
    """Score vector (gradient of the log-likelihood), intercept component last."""
    X = np.asarray(X, float)
    eta = X @ np.asarray(coefficients, float) + intercept
    resid = np.asarray(y, float) - expit(eta)
    return np.concatenate([X.T @ resid, [resid.sum()]])


def fit_logistic(
    X,
    y,
    feature_names: Sequence[str] | None = None,
    max_iter: int = 100,
    tol: float = 1e-8,
) -> LogisticModel:
    """Maximum-likelihood logistic fit by iteratively reweighted least squares.

    Converges when every component of the score vector falls below ``tol``.
    A singular weighted normal system is retried once with a 1e-10 ridge;
    quasi-separated fits (standardized coefficient magnitude above 30)
    return with ``separation_warning`` set.
    """
    X, y = _check_training_data(X, y)
    n, k = X.shape
    sds = X.std(axis=0)
    constant = np.where(sds == 0.0)[0]
    if len(constant):
        names = [feature_names[i] if feature_names else str(i) for i in constant]
        warnings.warn(f"constant feature column(s) {names}; coefficient not identifiable")

    A = np.hstack([X, np.ones((n, 1))])
    beta = np.zeros(k + 1)
    beta[-1] = math.log(y.mean() / (1.0 - y.mean()))
    ll = logistic_log_likelihood(X, y, beta[:k], beta[-1])
    for _ in range(max_iter):
        eta = A @ beta
        p = expit(eta)
        score = A.T @ (y - p)
        if np.max(np.abs(score)) < tol:
            break
        w = np.maximum(p * (1.0 - p), 1e-12)
        H = A.T @ (A * w[:, None])
        try:
            step = np.linalg.solve(H, score)
            if not np.isfinite(step).all():
                raise np.linalg.LinAlgError
        except np.linalg.LinAlgError:
            try:
                step = np.linalg.solve(H + 1e-10 * np.eye(k + 1), score)
            except np.linalg.LinAlgError:
                raise LearnError("design matrix is singular even after ridge jitter") from None
        # halve the Newton step until the likelihood does not decrease
        scale = 1.0
        for _ in range(40):
            cand = beta + scale * step
            ll_new = logistic_log_likelihood(X, y, cand[:k], cand[-1])
            if ll_new >= ll - 1e-12:
                break
            scale *= 0.5
        beta = beta + scale * step
        ll = logistic_log_likelihood(X, y, beta[:k], beta[-1])

    scaled = np.abs(beta[:k]) * np.where(sds > 0, sds, 1.0)
    return LogisticModel(
        coefficients=beta[:k],
        intercept=float(beta[-1]),
        feature_names=tuple(feature_names) if feature_names else None,
        separation_warning=bool(np.any(scaled > SEPARATION_COEF_LIMIT)),
    )


def logistic_score(model: LogisticModel, x) -> tuple[float, float, np.ndarray]:
    """(probability, linear score, per-feature contributions) for one vector.

    Contributions are coefficient*value per feature and sum exactly to
    ``linear_score - intercept``.
    """
    x = np.asarray(x, dtype=float)
    if x.shape != (model.n_features,):
        raise LearnError(f"expected {model.n_features} features, got shape {x.shape}")
    contributions = model.coefficients * x
    linear = float(contributions.sum() + model.intercept)
    return float(expit(linear)), linear, contributions


def goodness_of_fit(model: LogisticModel, X, y) -> FitDiagnostics:
    """Likelihood-ratio chi-square against the null model plus pseudo-R2 values."""
    X, y = _check_training_data(X, y)
    if X.shape[1] != model.n_features:
        raise LearnError("feature count mismatch")
    n = len(y)
    ll_model = logistic_log_likelihood(X, y, model.coefficients, model.intercept)
    p0 = y.mean()
    # same evaluation path as ll_model so a null model yields exactly zero
    null_intercept = math.log(p0 / (1.0 - p0))
    ll_null = logistic_log_likelihood(X, y, np.zeros(model.n_features), null_intercept)
    chi2 = 2.0 * (ll_model - ll_null)
    df = model.n_features
    p = float(chdtrc(df, chi2)) if chi2 > 0 else 1.0
    cox_snell = 1.0 - math.exp((2.0 / n) * (ll_null - ll_model))
    nagelkerke_max = 1.0 - math.exp((2.0 / n) * ll_null)
    nagelkerke = cox_snell / nagelkerke_max if nagelkerke_max > 0 else 0.0
    return FitDiagnostics(chi2, df, p, cox_snell, nagelkerke)


# ---------------------------------------------------------------------------
# Random forest
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ForestModel:
    trees: tuple[Tree, ...]
    oob_error: float
    bootstrap_seeds: tuple[int, ...]
    n_features: int
    n_training_rows: int
    max_features: int
    min_leaf: int
    seed: int

    def __post_init__(self):
        if not (0.0 <= self.oob_error <= 1.0):
            raise LearnError("oob_error must lie in [0, 1]")


@dataclass(frozen=True)
class ImportanceScores:
    scores: np.ndarray
    feature_names: tuple[str, ...] | None = None

    def __post_init__(self):
        arr = np.asarray(self.scores, dtype=float)
        object.__setattr__(self, "scores", arr)
        if not np.isfinite(arr).all():
            raise LearnError("importance scores must be finite")

    def ranking(self) -> np.ndarray:
        return np.argsort(-self.scores, kind="stable")


def _forest_tree_seeds(seed: int, n_trees: int) -> np.ndarray:
    return np.random.SeedSequence(seed).generate_state(n_trees, dtype=np.uint32)


def _bootstrap(rng: np.random.Generator, n: int) -> tuple[np.ndarray, np.ndarray]:
    idx = rng.integers(0, n, size=n)
    oob = np.bincount(idx, minlength=n) == 0
    return idx, oob


def fit_random_forest(
    X,
    y,
    n_trees: int = 100,
    max_features: int | None = None,
    min_leaf: int = 1,
    seed: int = 0,
) -> ForestModel:
    """Bagged Gini trees grown until pure or ``min_leaf``.

    Each tree sees a bootstrap sample of n rows and draws ``max_features``
    (default ceil(sqrt(k))) candidate features per node. The out-of-bag
    error is the majority-vote misclassification rate over the trees not
    containing each row. Bit-reproducible for a fixed seed.
    """
    X, y = _check_training_data(X, y)
    if n_trees < 1:
        raise LearnError("n_trees must be at least 1")
    n, k = X.shape
    if max_features is None:
        max_features = int(math.ceil(math.sqrt(k)))
    max_features = min(max_features, k)
    design = BinnedDesign.from_matrix(X)
    tree_seeds = _forest_tree_seeds(seed, n_trees)

    trees = []
    vote_sum = np.zeros(n)
    vote_cnt = np.zeros(n, dtype=int)
    for ts in tree_seeds:
        rng = np.random.default_rng(int(ts))
        idx, oob = _bootstrap(rng, n)
        tree = grow_tree(
            design, y, rows=idx, max_features=max_features, min_leaf=min_leaf, rng=rng
        )
        trees.append(tree)
        if oob.any():
            vote_sum[oob] += tree.predict_label(X[oob])
            vote_cnt[oob] += 1

    seen = vote_cnt > 0
    if seen.any():
        majority = (vote_sum[seen] / vote_cnt[seen]) >= 0.5
        oob_error = float(np.mean(majority != (y[seen] == 1)))
    else:
        oob_error = 0.0
    return ForestModel(
        trees=tuple(trees),
        oob_error=oob_error,
        bootstrap_seeds=tuple(int(s) for s in tree_seeds),
        n_features=k,
        n_training_rows=n,
        max_features=max_features,
        min_leaf=min_leaf,
        seed=seed,
    )


def forest_votes(model: ForestModel, X) -> np.ndarray:
    """Fraction of trees voting PD for each row."""
    X = np.asarray(X, dtype=float)
    votes = np.zeros(len(X))
    for tree in model.trees:
        votes += tree.predict_label(X)
    return votes / len(model.trees)


def permutation_importance(model: ForestModel, X, y, seed: int = 0) -> ImportanceScores:
    """Out-of-bag permutation importance.

    For every feature j and tree t the j-th column is shuffled among the
    tree's out-of-bag rows; the score is the mean increase in that tree's
    OOB error over trees divided by the standard deviation of the
    increases (zero when the deviation is zero).
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=int)
    if X.shape != (model.n_training_rows, model.n_features):
        raise LearnError(
            f"X has shape {X.shape}, expected training shape "
            f"({model.n_training_rows}, {model.n_features})"
        )
    n, k = X.shape
    rng_perm = np.random.default_rng(np.random.SeedSequence(seed))
    diffs = np.zeros((len(model.trees), k))
    for t, (tree, ts) in enumerate(zip(model.trees, model.bootstrap_seeds)):
        rng = np.random.default_rng(int(ts))
        _, oob = _bootstrap(rng, n)
        if not oob.any():
            continue
        Xo = X[oob].copy()
        yo = y[oob]
        base_err = float(np.mean(tree.predict_label(Xo) != yo))
        for j in range(k):
            saved = Xo[:, j].copy()
            Xo[:, j] = saved[rng_perm.permutation(len(saved))]
            err = float(np.mean(tree.predict_label(Xo) != yo))
            Xo[:, j] = saved
            diffs[t, j] = err - base_err
    means = diffs.mean(axis=0)
    sds = diffs.std(axis=0, ddof=1) if len(model.trees) > 1 else np.zeros(k)
    scores = np.where(sds > 0, means / np.where(sds > 0, sds, 1.0), 0.0)
    return ImportanceScores(scores=scores)


# ---------------------------------------------------------------------------
# Boosted trees (AdaBoost with depth-limited CART learners)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BoostModel:
    weak_learners: tuple[Tree, ...]
    learner_weights: np.ndarray
    n_features: int
    max_depth: int

    def __post_init__(self):
        w = np.asarray(self.learner_weights, dtype=float)
        object.__setattr__(self, "learner_weights", w)
        if len(w) != len(self.weak_learners):
            raise LearnError("one weight per weak learner required")
        if not (np.isfinite(w).all() and np.all(w > 0)):
            raise LearnError("learner weights must be finite and positive")


def fit_boosted(
    X,
    y,
    n_rounds: int = 100,
    max_depth: int = 2,
    seed: int = 0,
    min_leaf: int = 1,
) -> BoostModel:
    """AdaBoost over depth-limited Gini trees.

    Maintains observation weights, fits a weighted tree each round, and
    sets the learner weight to 0.5*ln((1-err)/err). Stops early on a round
    error of zero (capped weight, learner kept) or at least 0.5 (learner
    dropped); an empty ensemble is an error.
    """
    X, y = _check_training_data(X, y)
    if n_rounds < 1:
        raise LearnError("n_rounds must be at least 1")
    n, k = X.shape
    design = BinnedDesign.from_matrix(X)
    w = np.full(n, 1.0 / n)
    y_pm = 2.0 * y - 1.0

    learners: list[Tree] = []
    alphas: list[float] = []
    for _ in range(n_rounds):
        tree = grow_tree(
            design, y, rows=np.arange(n), sample_weight=w, max_depth=max_depth,
            min_leaf=min_leaf,
        )
        pred = tree.predict_label(X)
        miss = pred != y
        eps = float(w[miss].sum())
        if eps >= 0.5:
            break
        if eps <= 0.0:
            alphas.append(0.5 * math.log((1.0 - 1e-12) / 1e-12))
            learners.append(tree)
            break
        alpha = 0.5 * math.log((1.0 - eps) / eps)
        alphas.append(alpha)
        learners.append(tree)
        w = w * np.exp(-alpha * y_pm * (2.0 * pred - 1.0))
        w = w / w.sum()

    if not learners:
        raise LearnError("boosting halted immediately: weak learner no better than chance")
    return BoostModel(
        weak_learners=tuple(learners),
        learner_weights=np.array(alphas),
        n_features=k,
        max_depth=max_depth,
    )


def boost_margin(model: BoostModel, X) -> np.ndarray:
    """Weighted vote margin sum(alpha_t * h_t(x)) with h in {-1, +1}."""
    X = np.asarray(X, dtype=float)
    margin = np.zeros(len(X))
    for tree, alpha in zip(model.weak_learners, model.learner_weights):
        margin += alpha * (2.0 * tree.predict_label(X) - 1.0)
    return margin


# ---------------------------------------------------------------------------
# Support vector machine (RBF kernel, SMO solver)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SvmModel:
    support_vectors: np.ndarray       # raw (unstandardized) training vectors
    dual_coefficients: np.ndarray     # alpha_i * y_i, signed
    bias: float
    gamma: float
    c: float
    scaler_mean: np.ndarray
    scaler_sd: np.ndarray
    n_features: int

    def __post_init__(self):
        for name in ("support_vectors", "dual_coefficients", "scaler_mean", "scaler_sd"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float))
        if np.any(np.abs(self.dual_coefficients) > self.c * (1 + 1e-12)):
            raise LearnError("dual coefficients must respect the box constraint")
        if abs(float(self.dual_coefficients.sum())) > 1e-8 * max(1.0, self.c):
            raise LearnError("signed dual coefficients must sum to zero")


def _rbf_kernel(A: np.ndarray, B: np.ndarray, gamma: float) -> np.ndarray:
    sq = (
        np.sum(A * A, axis=1)[:, None]
        + np.sum(B * B, axis=1)[None, :]
        - 2.0 * (A @ B.T)
    )
    np.maximum(sq, 0.0, out=sq)
    return np.exp(-gamma * sq)


def fit_svm(
    X,
    y,
    c: float = 1.0,
    gamma: float | None = None,
    tol: float = 1e-3,
    seed: int = 0,
    max_iter: int = 1_000_000,
) -> SvmModel:
    """C-SVC with RBF kernel solved by sequential minimal optimization.

    Features are standardized internally with training statistics; gamma
    defaults to 1/k on the standardized scale. Pair selection is
    maximal-violating-pair and optimization stops when the KKT violation
    gap falls below ``tol``.
    """
    X, y = _check_training_data(X, y)
    if c <= 0 or (gamma is not None and gamma <= 0):
        raise LearnError("c and gamma must be positive")
    n, k = X.shape
    mu = X.mean(axis=0)
    sd = X.std(axis=0)
    sd = np.where(sd > 0, sd, 1.0)
    Xs = (X - mu) / sd
    if gamma is None:
        gamma = 1.0 / k

    y_pm = (2.0 * y - 1.0).astype(float)
    K = _rbf_kernel(Xs, Xs, gamma)
    alpha = np.zeros(n)
    G = -np.ones(n)  # gradient of the dual objective 0.5 a'Qa - e'a
    pos = y_pm > 0

    for iteration in range(max_iter):
        vals = -y_pm * G
        up = (pos & (alpha < c)) | (~pos & (alpha > 0))
        low = (pos & (alpha > 0)) | (~pos & (alpha < c))
        if not up.any() or not low.any():
            break
        up_vals = np.where(up, vals, -np.inf)
        low_vals = np.where(low, vals, np.inf)
        i = int(np.argmax(up_vals))
        j = int(np.argmin(low_vals))
        m_up, m_low = vals[i], vals[j]
        if m_up - m_low <= tol:
            break

        Qii = K[i, i]
        Qjj = K[j, j]
        Qij = y_pm[i] * y_pm[j] * K[i, j]
        ai_old, aj_old = alpha[i], alpha[j]
        if y_pm[i] != y_pm[j]:
            quad = max(Qii + Qjj + 2.0 * Qij, 1e-12)
            delta = (-G[i] - G[j]) / quad
            diff = ai_old - aj_old
            ai, aj = ai_old + delta, aj_old + delta
            if diff > 0:
                if aj < 0:
                    aj, ai = 0.0, diff
                if ai > c:
                    ai, aj = c, c - diff
            else:
                if ai < 0:
                    ai, aj = 0.0, -diff
                if aj > c:
                    aj, ai = c, c + diff
        else:
            quad = max(Qii + Qjj - 2.0 * Qij, 1e-12)
            delta = (G[i] - G[j]) / quad
            total = ai_old + aj_old
            ai, aj = ai_old - delta, aj_old + delta
            if total > c:
                if ai > c:
                    ai, aj = c, total - c
                if aj > c:
                    aj, ai = c, total - c
            else:
                if aj < 0:
                    aj, ai = 0.0, total
                if ai < 0:
                    ai, aj = 0.0, total
        alpha[i], alpha[j] = ai, aj
        d_i, d_j = ai - ai_old, aj - aj_old
        if d_i != 0.0:
            G += (d_i * y_pm[i]) * (y_pm * K[:, i])
        if d_j != 0.0:
            G += (d_j * y_pm[j]) * (y_pm * K[:, j])
    else:
        raise LearnError(f"SMO did not converge within {max_iter} subproblems")

    vals = -y_pm * G
    free = (alpha > 0) & (alpha < c)
    if free.any():
        bias = float(vals[free].mean())
    else:
        up = (pos & (alpha < c)) | (~pos & (alpha > 0))
        low = (pos & (alpha > 0)) | (~pos & (alpha < c))
        hi = vals[up].max() if up.any() else 0.0
        lo = vals[low].min() if low.any() else 0.0
        bias = float(0.5 * (hi + lo))

    sv = alpha > 0
    return SvmModel(
        support_vectors=X[sv],
        dual_coefficients=alpha[sv] * y_pm[sv],
        bias=bias,
        gamma=float(gamma),
        c=float(c),
        scaler_mean=mu,
        scaler_sd=sd,
        n_features=k,
    )


def svm_decision(model: SvmModel, X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    Xs = (X - model.scaler_mean) / model.scaler_sd
    SVs = (model.support_vectors - model.scaler_mean) / model.scaler_sd
    K = _rbf_kernel(Xs, SVs, model.gamma)
    return K @ model.dual_coefficients + model.bias


# ---------------------------------------------------------------------------
# Unified scoring
# ---------------------------------------------------------------------------

def predict_score(model, X) -> np.ndarray:
    """Monotone PD-risk score for each row of X.

    Logistic models return probabilities, forests the fraction of PD votes,
    boosted ensembles the logistic of the normalized margin, and SVMs the
    signed decision value.
    """
    X = np.asarray(X, dtype=float)
    single = X.ndim == 1
    if single:
        X = X[None, :]
    n_features = model.n_features
    if X.shape[1] != n_features:
        raise LearnError(f"expected {n_features} features, got {X.shape[1]}")

    if isinstance(model, LogisticModel):
        scores = expit(X @ model.coefficients + model.intercept)
    elif isinstance(model, ForestModel):
        scores = forest_votes(model, X)
    elif isinstance(model, BoostModel):
        margin = boost_margin(model, X)
        scores = expit(margin / float(model.learner_weights.sum()))
    elif isinstance(model, SvmModel):
        scores = svm_decision(model, X)
    else:
        raise LearnError(f"unknown model type {type(model).__name__}")
    return scores[0] if single else scores


def score_threshold(model) -> float:
    """Classification threshold paired with predict_score."""
    return 0.0 if isinstance(model, SvmModel) else 0.5
