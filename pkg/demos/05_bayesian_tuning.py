#!/usr/bin/env python3
"""Bayesian hyperparameter optimization of the forest and the SVM.

The tuner fits a Gaussian-process surrogate over the bounded search box
and spends its budget on expected-improvement maximizers. The forest
objective is its own out-of-bag error; the SVM objective is an inner
10-fold cross-validation error.
"""

import numpy as np

from pqscreen import bayes_optimize, fit_random_forest, synthesize_cohort, wilcoxon_filter
from pqscreen.evaluation import TUNE_SPACES, _inner_folds, _fit_model
from pqscreen.learn import predict_score, score_threshold

cohort = synthesize_cohort(n_normal_subjects=50, n_pd_subjects=80,
                           visits_normal=2.0, visits_pd=2.0, seed=3)
mask = wilcoxon_filter(cohort, alpha=0.05)
X, y = mask.transform(cohort.X), cohort.y

def forest_oob(point):
    return fit_random_forest(X, y, n_trees=point["n_trees"],
                             min_leaf=point["min_leaf"], seed=0).oob_error

result = bayes_optimize(forest_oob, TUNE_SPACES["forest"], budget=12, seed=1)
print(f"forest: best OOB error {result.best_objective:.4f} at {result.best_point}")

rng = np.random.default_rng(0)
fold_ids = _inner_folds(y, np.arange(len(y)), 10, rng)

def svm_cv_error(point):
    errors = []
    for f in range(10):
        val = fold_ids == f
        model = _fit_model("svm", X[~val], y[~val], dict(point), seed=0)
        pred = predict_score(model, X[val]) >= score_threshold(model)
        errors.append(float(np.mean(pred != (y[val] == 1))))
    return float(np.mean(errors))

result = bayes_optimize(svm_cv_error, TUNE_SPACES["svm"], budget=12, seed=2)
best = {k: round(v, 5) for k, v in result.best_point.items()}
print(f"svm: best inner-CV error {result.best_objective:.4f} at {best}")
print("evaluation history (objective per step):")
print(np.round([v for _, v in result.history], 4))
