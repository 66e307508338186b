"""Partitioning, metrics, nested cross-validation, and comparison analyses.

Cross-validation folds partition either records or whole subjects
(subject-wise folds never split one subject's visits between training and
test) with per-class stratification. The nested runner fits selectors and
tunes hyperparameters strictly inside each outer training fold and
evaluates on the untouched outer test fold.
"""

from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, asdict

import numpy as np

from . import __version__ as _toolkit_version
from .cohort import Cohort, PQ_ITEM_NAMES, FEATURE_NAMES, SBR_NAMES, SEVERITY_LEVELS
from .learn import (
    fit_boosted,
    fit_logistic,
    fit_random_forest,
    fit_svm,
    predict_score,
    score_threshold,
)
from .selection import lasso_select, pca_fit, wilcoxon_filter
from .stats import TestResult, anova_tukey, ci95, spearman
from .tune import Dimension, SearchSpace, bayes_optimize

SCHEMES = ("subject_wise", "record_wise")
SELECTORS = ("wilcoxon", "lasso", "pca")
MODELS = ("logistic", "forest", "boost", "svm")

METRIC_NAMES = ("accuracy", "sensitivity", "specificity", "auc")

DEFAULT_HP = {
    "logistic": {},
    "forest": {"n_trees": 100, "min_leaf": 1},
    "boost": {"n_rounds": 100, "max_depth": 2},
    "svm": {"c": 1.0, "gamma": None},
}

TUNE_SPACES = {
    "forest": SearchSpace(
        (
            Dimension("n_trees", 50, 500, integer=True),
            Dimension("min_leaf", 1, 20, integer=True),
        )
    ),
    "boost": SearchSpace(
        (
            Dimension("n_rounds", 50, 500, integer=True),
            Dimension("max_depth", 1, 4, integer=True),
        )
    ),
    "svm": SearchSpace(
        (
            Dimension("c", 1e-2, 1e3, scale="log"),
            Dimension("gamma", 1e-4, 1e1, scale="log"),
        )
    ),
}


class EvalError(ValueError):
    """Invalid evaluation input or configuration."""


# ---------------------------------------------------------------------------
# Fold plans
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FoldPlan:
    scheme: str
    k: int
    seed: int
    folds: tuple  # tuple of sorted observation-index arrays (test sets)

    def __post_init__(self):
        seen = np.concatenate(self.folds)
        if len(seen) != len(np.unique(seen)):
            raise EvalError("folds must be disjoint")

    def train_indices(self, fold: int) -> np.ndarray:
        return np.sort(np.concatenate([f for i, f in enumerate(self.folds) if i != fold]))


def _normalize_scheme(scheme: str) -> str:
    s = scheme.lower().replace("-", "_")
    aliases = {"subject": "subject_wise", "record": "record_wise"}
    s = aliases.get(s, s)
    if s not in SCHEMES:
        raise EvalError(f"unknown scheme {scheme!r}; expected subject_wise or record_wise")
    return s


def _stratified_unit_folds(units_by_class, k, rng):
    """Deal each class's units round-robin into k folds.

    Per-class fold counts differ by at most one; the deal position carries
    over between classes so the leftover units of different classes land on
    different folds where possible.
    """
    folds = [[] for _ in range(k)]
    pos = int(rng.integers(k))
    for units in units_by_class:
        if len(units) < k:
            raise EvalError(f"a class has only {len(units)} units for {k} folds")
        perm = rng.permutation(len(units))
        for j, u in enumerate(perm):
            folds[(j + pos) % k].append(units[u])
        pos = (pos + len(units)) % k
    return folds


def make_fold_plan(cohort: Cohort, scheme: str, k: int = 10, seed: int = 0) -> FoldPlan:
    """Stratified k-fold assignment by record or by subject, seeded."""
    scheme = _normalize_scheme(scheme)
    if k < 2:
        raise EvalError("k must be at least 2")
    rng = np.random.default_rng(seed)

    if scheme == "record_wise":
        units_by_class = [np.where(cohort.y == c)[0] for c in (0, 1)]
        unit_folds = _stratified_unit_folds(units_by_class, k, rng)
        folds = tuple(np.sort(np.array(f, dtype=int)) for f in unit_folds)
    else:
        subj = cohort.subject_ids.astype(str)
        units_by_class = []
        for c in (0, 1):
            units_by_class.append(np.unique(subj[cohort.y == c]))
        unit_folds = _stratified_unit_folds(units_by_class, k, rng)
        folds = tuple(
            np.sort(np.where(np.isin(subj, np.array(f)))[0]) for f in unit_folds
        )

    total = sum(len(f) for f in folds)
    if total != len(cohort):
        raise EvalError("folds do not cover the cohort")
    return FoldPlan(scheme=scheme, k=k, seed=seed, folds=folds)


# ---------------------------------------------------------------------------
# Metrics
# ---------------------------------------------------------------------------

def _doubled_midranks_int(sorted_vals: np.ndarray) -> np.ndarray:
    """Doubled mid-ranks of an ascending array; exact integers even with ties."""
    n = len(sorted_vals)
    new_group = np.empty(n, dtype=bool)
    new_group[0] = True
    new_group[1:] = sorted_vals[1:] != sorted_vals[:-1]
    group_id = np.cumsum(new_group) - 1
    starts = np.flatnonzero(new_group)
    ends = np.append(starts[1:], n) - 1
    doubled = (starts + 1) + (ends + 1)
    return doubled[group_id]


def roc_auc(scores, labels) -> float:
    """AUC via the rank (Mann-Whitney) formulation, exact under ties.

    Equals (concordant pairs + 0.5 * tied pairs) / (n1 * n0), computed with
    integer doubled mid-ranks so the result matches brute-force pair
    counting bit for bit.
    """
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels, dtype=int)
    n1 = int(np.sum(labels == 1))
    n0 = int(np.sum(labels == 0))
    if n1 == 0 or n0 == 0:
        raise EvalError("AUC needs both classes")
    order = np.argsort(scores, kind="mergesort")
    doubled = _doubled_midranks_int(scores[order])
    r2 = int(doubled[labels[order] == 1].sum())
    return (r2 - n1 * (n1 + 1)) / (2 * n1 * n0)


def confusion_metrics(scores, labels, threshold: float = 0.5) -> tuple[float, float, float]:
    """(accuracy, sensitivity, specificity) with PD as the positive class."""
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels, dtype=int)
    if len(np.unique(labels)) < 2:
        raise EvalError("confusion metrics need both classes")
    pred = scores >= threshold
    pos = labels == 1
    tp = int(np.sum(pred & pos))
    tn = int(np.sum(~pred & ~pos))
    sensitivity = tp / int(pos.sum())
    specificity = tn / int((~pos).sum())
    accuracy = (tp + tn) / len(labels)
    return accuracy, sensitivity, specificity


# ---------------------------------------------------------------------------
# Nested cross-validation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MetricRecord:
    repetition: int
    fold: int
    accuracy: float
    sensitivity: float
    specificity: float
    auc: float

    def __post_init__(self):
        for m in METRIC_NAMES:
            v = getattr(self, m)
            if not (0.0 <= v <= 1.0):
                raise EvalError(f"{m}={v} outside [0, 1]")


@dataclass(frozen=True)
class CVReport:
    config: dict
    records: tuple
    aggregates: dict
    misclassified: tuple

    def label(self) -> str:
        return f"{self.config['selector']}+{self.config['model']}"

    def metric_values(self, metric: str) -> np.ndarray:
        if metric not in METRIC_NAMES:
            raise EvalError(f"unknown metric {metric!r}")
        return np.array([getattr(r, metric) for r in self.records])

    def to_dict(self) -> dict:
        return {
            "config": self.config,
            "records": [asdict(r) for r in self.records],
            "aggregates": self.aggregates,
            "misclassified": list(self.misclassified),
        }

    def to_json(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=2)

    @classmethod
    def from_dict(cls, d: dict) -> "CVReport":
        return cls(
            config=d["config"],
            records=tuple(MetricRecord(**r) for r in d["records"]),
            aggregates=d["aggregates"],
            misclassified=tuple(tuple(m) for m in d["misclassified"]),
        )

    @classmethod
    def from_json(cls, path) -> "CVReport":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def write_records_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["repetition", "fold"] + list(METRIC_NAMES))
            for r in self.records:
                w.writerow(
                    [r.repetition, r.fold] + [repr(getattr(r, m)) for m in METRIC_NAMES]
                )


def aggregate_records(records) -> dict:
    out = {}
    for m in METRIC_NAMES:
        vals = [getattr(r, m) for r in records]
        lo, hi = ci95(vals)
        out[m] = {"mean": float(np.mean(vals)), "ci_low": lo, "ci_high": hi}
    return out


def _derive_seed(seed: int, *key: int) -> int:
    return int(np.random.SeedSequence(seed, spawn_key=tuple(key)).generate_state(1)[0])


def _fit_selector(train: Cohort, selector: str, seed: int, params: dict):
    if selector == "wilcoxon":
        return wilcoxon_filter(train, alpha=params.get("alpha", 0.05))
    if selector == "lasso":
        return lasso_select(
            train,
            lambda_grid=params.get("lambda_grid"),
            folds=params.get("folds", 10),
            seed=seed,
        )
    if selector == "pca":
        return pca_fit(train, variance_threshold=params.get("variance_threshold", 0.99))
    raise EvalError(f"unknown selector {selector!r}; expected one of {SELECTORS}")


def _fit_model(model: str, X, y, hp: dict, seed: int):
    if model == "logistic":
        return fit_logistic(X, y)
    if model == "forest":
        return fit_random_forest(
            X, y, n_trees=hp["n_trees"], min_leaf=hp["min_leaf"], seed=seed
        )
    if model == "boost":
        return fit_boosted(
            X, y, n_rounds=hp["n_rounds"], max_depth=hp["max_depth"], seed=seed
        )
    if model == "svm":
        return fit_svm(X, y, c=hp["c"], gamma=hp["gamma"], seed=seed)
    raise EvalError(f"unknown model {model!r}; expected one of {MODELS}")


def _inner_folds(y, units, k, rng):
    """Stratified fold ids over observations for the inner tuning split."""
    fold_of_unit = {}
    for c in (0, 1):
        cls_units = np.unique(units[y == c])
        perm = rng.permutation(len(cls_units))
        offset = int(rng.integers(k))
        for j, u in enumerate(perm):
            fold_of_unit[cls_units[u]] = (j + offset) % k
    return np.array([fold_of_unit[u] for u in units])


def _tune_hyperparameters(model, X, y, units, scheme, budget, seed):
    """Inner tuning objective: OOB error for forests, inner-CV error otherwise."""
    space = TUNE_SPACES.get(model)
    if space is None or budget <= 0:
        return dict(DEFAULT_HP[model])

    if model == "forest":
        def objective(point):
            f = _fit_model("forest", X, y, dict(point), seed=_derive_seed(seed, 7))
            return f.oob_error
    else:
        rng = np.random.default_rng(_derive_seed(seed, 11))
        k_inner = 10
        min_units = min(len(np.unique(units[y == c])) for c in (0, 1))
        k_inner = max(2, min(k_inner, min_units))
        fold_ids = _inner_folds(y, units, k_inner, rng)

        def objective(point):
            errors = []
            for f in range(k_inner):
                val = fold_ids == f
                if len(np.unique(y[~val])) < 2 or val.sum() == 0:
                    continue
                m = _fit_model(model, X[~val], y[~val], dict(point), seed=_derive_seed(seed, 13, f))
                pred = predict_score(m, X[val]) >= score_threshold(m)
                errors.append(float(np.mean(pred != (y[val] == 1))))
            return float(np.mean(errors)) if errors else math.inf

    result = bayes_optimize(objective, space, budget=budget, seed=_derive_seed(seed, 17))
    hp = dict(DEFAULT_HP[model])
    hp.update(result.best_point)
    return hp


def _run_repetition(payload):
    (cohort, scheme, selector, model, k, rep, seed, tune_budget, selector_params) = payload
    plan = make_fold_plan(cohort, scheme, k, seed=_derive_seed(seed, rep))
    subj = cohort.subject_ids.astype(str)
    records = []
    misclassified = []
    for fold in range(k):
        test_idx = plan.folds[fold]
        train_idx = plan.train_indices(fold)
        train = cohort.subset(train_idx)
        if len(np.unique(train.y)) < 2:
            raise EvalError(f"training data of repetition {rep}, fold {fold} lost a class")
        sel_seed, model_seed, tune_seed = (
            _derive_seed(seed, rep, fold, 0),
            _derive_seed(seed, rep, fold, 1),
            _derive_seed(seed, rep, fold, 2),
        )
        sel = _fit_selector(train, selector, sel_seed, selector_params)
        Xtr = sel.transform(train.X)
        units = subj[train_idx] if plan.scheme == "subject_wise" else train_idx
        hp = _tune_hyperparameters(model, Xtr, train.y, units, scheme, tune_budget, tune_seed)
        fitted = _fit_model(model, Xtr, train.y, hp, model_seed)

        Xte = sel.transform(cohort.X[test_idx])
        yte = cohort.y[test_idx]
        scores = predict_score(fitted, Xte)
        thr = score_threshold(fitted)
        acc, sens, spec = confusion_metrics(scores, yte, thr)
        records.append(
            MetricRecord(
                repetition=rep,
                fold=fold,
                accuracy=acc,
                sensitivity=sens,
                specificity=spec,
                auc=roc_auc(scores, yte),
            )
        )
        pred = (scores >= thr).astype(int)
        for local_i, global_i in enumerate(test_idx):
            if pred[local_i] != yte[local_i]:
                misclassified.append(
                    (
                        rep,
                        fold,
                        str(cohort.subject_ids[global_i]),
                        int(cohort.visits[global_i]),
                        int(yte[local_i]),
                        int(pred[local_i]),
                    )
                )
    return records, misclassified


def run_nested_cv(
    cohort: Cohort,
    scheme: str,
    selector: str,
    model: str,
    k: int = 10,
    repetitions: int = 10,
    seed: int = 0,
    tune_budget: int = 0,
    jobs: int = 1,
    selector_params: dict | None = None,
) -> CVReport:
    """Repeated nested cross-validation of one selector/model pipeline.

    Every repetition draws a fresh stratified fold plan from a seed derived
    from the master seed, so results are reproducible and independent of
    scheduling. Selector fitting and hyperparameter tuning only ever see
    outer-training data; ``tune_budget`` of 0 uses the per-model default
    hyperparameters.
    """
    scheme = _normalize_scheme(scheme)
    if model not in MODELS:
        raise EvalError(f"unknown model {model!r}; expected one of {MODELS}")
    if selector not in SELECTORS:
        raise EvalError(f"unknown selector {selector!r}; expected one of {SELECTORS}")
    if k < 2 or repetitions < 1:
        raise EvalError("k must be >= 2 and repetitions >= 1")
    selector_params = dict(selector_params or {})

    payloads = [
        (cohort, scheme, selector, model, k, rep, seed, tune_budget, selector_params)
        for rep in range(repetitions)
    ]
    if jobs > 1 and repetitions > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_repetition, payloads))
    else:
        results = [_run_repetition(p) for p in payloads]

    records = tuple(r for recs, _ in results for r in recs)
    misclassified = tuple(m for _, mis in results for m in mis)
    config = {
        "scheme": scheme,
        "selector": selector,
        "model": model,
        "k": k,
        "repetitions": repetitions,
        "seed": seed,
        "tune_budget": tune_budget,
        "selector_params": {k_: v for k_, v in selector_params.items() if v is not None},
        "toolkit_version": _toolkit_version,
    }
    return CVReport(
        config=config,
        records=records,
        aggregates=aggregate_records(records),
        misclassified=misclassified,
    )


# ---------------------------------------------------------------------------
# Comparisons and analyses
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ComparisonRow:
    label: str
    mean: float
    ci_low: float
    ci_high: float
    is_best: bool
    differs_from_best: bool


@dataclass(frozen=True)
class ComparisonTable:
    metric: str
    anova: TestResult
    rows: tuple
    pairwise: tuple

    def write_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(
                ["label", "mean", "ci_low", "ci_high", "is_best", "differs_from_best"]
            )
            for r in self.rows:
                w.writerow(
                    [r.label, repr(r.mean), repr(r.ci_low), repr(r.ci_high),
                     int(r.is_best), int(r.differs_from_best)]
                )


def compare_classifiers(reports, metric: str = "auc", alpha: float = 0.05) -> ComparisonTable:
    """ANOVA plus Tukey-Kramer comparison of per-record metric distributions."""
    if len(reports) < 2:
        raise EvalError("need at least 2 reports to compare")
    n_records = len(reports[0].records)
    schemes = {r.config["scheme"] for r in reports}
    if len(schemes) > 1:
        raise EvalError("reports mix partitioning schemes")
    if any(len(r.records) != n_records for r in reports):
        raise EvalError("reports carry different record counts")
    groups = [r.metric_values(metric) for r in reports]
    anova, pairwise = anova_tukey(groups, alpha=alpha)
    means = [float(np.mean(g)) for g in groups]
    best = int(np.argmax(means))
    differs = [False] * len(reports)
    for comp in pairwise:
        if best in (comp.group_a, comp.group_b) and comp.significant:
            other = comp.group_b if comp.group_a == best else comp.group_a
            differs[other] = True
    rows = []
    for i, rep in enumerate(reports):
        lo, hi = ci95(groups[i])
        rows.append(
            ComparisonRow(
                label=rep.label(),
                mean=means[i],
                ci_low=lo,
                ci_high=hi,
                is_best=i == best,
                differs_from_best=differs[i],
            )
        )
    return ComparisonTable(metric=metric, anova=anova, rows=tuple(rows), pairwise=pairwise)


def total_score_baseline(cohort: Cohort) -> float:
    """AUC of the plain questionnaire total (sum of the 20 severities)."""
    totals = cohort.pq_matrix().sum(axis=1)
    return roc_auc(totals, cohort.y)


def misclassification_profile(report: CVReport, cohort: Cohort) -> dict:
    """Severity histograms of misclassified observations, split by true class.

    Counts are collective over repetitions: an observation misclassified in
    several repetitions contributes once per repetition.
    """
    index = {
        (str(s), int(v)): i
        for i, (s, v) in enumerate(zip(cohort.subject_ids, cohort.visits))
    }
    per_class = {0: np.zeros((len(PQ_ITEM_NAMES), SEVERITY_LEVELS), dtype=int),
                 1: np.zeros((len(PQ_ITEM_NAMES), SEVERITY_LEVELS), dtype=int)}
    for entry in report.misclassified:
        _, _, sid, visit, true_label, _ = entry
        key = (str(sid), int(visit))
        if key not in index:
            raise EvalError(f"misclassified observation {key} not present in cohort")
        row = cohort.pq_matrix()[index[key]].astype(int)
        for j, sev in enumerate(row):
            per_class[int(true_label)][j, sev] += 1
    return {
        label: {name: per_class[label][j].copy() for j, name in enumerate(PQ_ITEM_NAMES)}
        for label in (0, 1)
    }


def correlation_with_hy(cohort: Cohort) -> dict[str, TestResult]:
    """Spearman correlation of each feature, the PQ total, and SBR columns with HY."""
    if cohort.hy is None:
        raise EvalError("cohort has no HY column")
    valid = ~np.isnan(cohort.hy)
    if valid.sum() < 3:
        raise EvalError("need at least 3 observations with an HY stage")
    hy = cohort.hy[valid]
    if np.all(hy == hy[0]):
        raise EvalError("HY stage is constant")
    out = {}
    for j, name in enumerate(FEATURE_NAMES):
        out[name] = spearman(cohort.X[valid, j], hy)
    out["PQ_TOTAL"] = spearman(cohort.pq_matrix()[valid].sum(axis=1), hy)
    if cohort.sbr is not None:
        for j, name in enumerate(SBR_NAMES):
            col = cohort.sbr[:, j]
            ok = valid & ~np.isnan(col)
            if ok.sum() >= 3 and not np.all(cohort.hy[ok] == cohort.hy[ok][0]):
                out[name] = spearman(col[ok], cohort.hy[ok])
    return out
