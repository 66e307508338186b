#!/usr/bin/env python3
"""Train the four classifiers and score observations.

Fits logistic regression, a random forest, boosted trees, and an RBF SVM
on the same selected features, compares their PD-risk scores, and then
evaluates the published full-data logistic model on a few clinical
vignettes.
"""

import numpy as np

from pqscreen import (
    builtin_artifact,
    fit_boosted,
    fit_logistic,
    fit_random_forest,
    fit_svm,
    goodness_of_fit,
    logistic_score,
    model_from_artifact,
    permutation_importance,
    predict_score,
    synthesize_cohort,
    wilcoxon_filter,
)
from pqscreen.cohort import FEATURE_NAMES, PQ_ITEM_NAMES

cohort = synthesize_cohort(n_normal_subjects=120, n_pd_subjects=240, seed=7)
mask = wilcoxon_filter(cohort, alpha=0.05)
X = mask.transform(cohort.X)
y = cohort.y
names = mask.names()

models = {
    "logistic": fit_logistic(X, y, feature_names=names),
    "forest": fit_random_forest(X, y, n_trees=100, seed=1),
    "boost": fit_boosted(X, y, n_rounds=100, max_depth=2),
    "svm": fit_svm(X, y, c=1.0),
}
for label, model in models.items():
    scores = predict_score(model, X)
    threshold = 0.0 if label == "svm" else 0.5
    acc = np.mean((scores >= threshold).astype(int) == y)
    print(f"{label:8s} training accuracy {acc:.3f}")

diag = goodness_of_fit(models["logistic"], X, y)
print(f"logistic fit: chi-square {diag.model_chi_square:.1f} (df {diag.df}), "
      f"Cox-Snell R2 {diag.cox_snell_r2:.2f}, Nagelkerke R2 {diag.nagelkerke_r2:.2f}")

imp = permutation_importance(models["forest"], X, y, seed=3)
ranked = [names[i] for i in imp.ranking()[:5]]
print(f"forest permutation importance, top 5: {ranked}")

# the published 22-feature logistic model ships as an artifact
model, _, feature_names = model_from_artifact(builtin_artifact("paper-eq1"))

def vignette(description, **settings):
    x = np.zeros(len(feature_names))
    for key, value in settings.items():
        x[feature_names.index(key)] = value
    p, f, contribs = logistic_score(model, x)
    top = feature_names[int(np.argmax(np.abs(contribs)))]
    print(f"{description:42s} p(PD)={p:8.4%} linear={f:+.3f} driver={top}")

vignette("all items 0, age 0", AGE=0)
vignette("healthy 66-year-old", AGE=66.42)
vignette("tremor 4, male code 1, age 66", P2_TRMR=4, GENDER=1, AGE=66)
vignette("handwriting 2 + eating 1, age 70", P2_HWRT=2, P2_EAT=1, AGE=70)
