"""Binary CART decision trees with Gini splitting.

Shared engine for the random forest (per-node feature subsampling,
unweighted) and for boosting (observation weights, depth limit). Features
are pre-binned once per dataset: low-cardinality features (questionnaire
severities, gender) get one bin per distinct value, so split search reduces
to a histogram scan; continuous features with more than ``MAX_BINS``
distinct values are quantile-compressed, with thresholds placed between
the realized bin boundaries so training and prediction agree exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MAX_BINS = 256
_MIN_GAIN = 1e-12


@dataclass
class BinnedDesign:
    """Per-feature integer codes plus the real-valued split thresholds."""

    codes: np.ndarray          # (n, k) int32
    n_bins: np.ndarray         # (k,) bins per feature
    thresholds: list           # per feature: (n_bins-1,) threshold between code c and c+1
    n_features: int

    @classmethod
    def from_matrix(cls, X: np.ndarray) -> "BinnedDesign":
        X = np.asarray(X, dtype=float)
        n, k = X.shape
        codes = np.empty((n, k), dtype=np.int32)
        n_bins = np.empty(k, dtype=np.int32)
        thresholds = []
        for j in range(k):
            col = X[:, j]
            uniq = np.unique(col)
            if len(uniq) > MAX_BINS:
                pick = np.unique(np.linspace(0, len(uniq) - 1, MAX_BINS).round().astype(int))
                grid = uniq[pick]
            else:
                grid = uniq
            c = np.searchsorted(grid, col, side="right") - 1
            c = np.clip(c, 0, len(grid) - 1)
            codes[:, j] = c
            n_bins[j] = len(grid)
            if len(grid) > 1:
                bin_max = np.full(len(grid), -np.inf)
                np.maximum.at(bin_max, c, col)
                thresholds.append(0.5 * (bin_max[:-1] + grid[1:]))
            else:
                thresholds.append(np.empty(0))
        return cls(codes=codes, n_bins=n_bins, thresholds=thresholds, n_features=k)


@dataclass
class Tree:
    """Flat-array binary tree; ``feature == -1`` marks a leaf."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    pd_fraction: np.ndarray   # weighted positive-class fraction at the node

    def apply(self, X: np.ndarray) -> np.ndarray:
        """Leaf node index for every row of X."""
        X = np.asarray(X, dtype=float)
        node = np.zeros(len(X), dtype=np.int32)
        while True:
            feat = self.feature[node]
            active = np.where(feat >= 0)[0]
            if len(active) == 0:
                return node
            sub = node[active]
            go_left = X[active, feat[active]] <= self.threshold[sub]
            node[active] = np.where(go_left, self.left[sub], self.right[sub])

    def predict_fraction(self, X: np.ndarray) -> np.ndarray:
        return self.pd_fraction[self.apply(X)]

    def predict_label(self, X: np.ndarray) -> np.ndarray:
        # an exactly split node votes for the positive class
        return (self.predict_fraction(X) >= 0.5).astype(np.int8)

    def depth(self) -> int:
        d = np.zeros(len(self.feature), dtype=int)
        for i in range(len(self.feature)):
            if self.feature[i] >= 0:
                d[self.left[i]] = d[i] + 1
                d[self.right[i]] = d[i] + 1
        return int(d.max()) if len(d) else 0


def _best_split(codes, n_bins, y, w, counts_needed, rows, candidates, min_leaf):
    """Best (feature, code threshold, gain) over candidate features, or None."""
    yw = w[rows]
    ysub = y[rows]
    total_w = yw.sum()
    total_w1 = float(yw @ ysub)
    total_w0 = float(total_w - total_w1)
    parent = (total_w0 * total_w0 + total_w1 * total_w1) / total_w
    best = None
    best_score = parent + _MIN_GAIN * total_w
    for f in candidates:
        nb = int(n_bins[f])
        if nb < 2:
            continue
        c = codes[rows, f]
        hist = np.bincount(c * 2 + ysub, weights=yw, minlength=2 * nb).reshape(nb, 2)
        left = np.cumsum(hist, axis=0)[:-1]
        lw = left.sum(axis=1)
        rw = total_w - lw
        if counts_needed:
            cnt = np.cumsum(np.bincount(c, minlength=nb))[:-1]
            ln, rn = cnt, len(rows) - cnt
        else:
            ln, rn = lw, rw
        valid = (ln >= min_leaf) & (rn >= min_leaf) & (lw > 0) & (rw > 0)
        if not valid.any():
            continue
        with np.errstate(divide="ignore", invalid="ignore"):
            score = (left[:, 0] ** 2 + left[:, 1] ** 2) / lw + (
                (total_w0 - left[:, 0]) ** 2 + (total_w1 - left[:, 1]) ** 2
            ) / rw
        score[~valid] = -np.inf
        t = int(np.argmax(score))
        if score[t] > best_score:
            best_score = score[t]
            best = (int(f), t)
    return best


def grow_tree(
    design: BinnedDesign,
    y: np.ndarray,
    rows: np.ndarray,
    sample_weight: np.ndarray | None = None,
    max_features: int | None = None,
    min_leaf: int = 1,
    max_depth: int | None = None,
    rng: np.random.Generator | None = None,
) -> Tree:
    """Grow a tree on ``rows`` until pure, ``min_leaf``, or ``max_depth``.

    ``max_features`` draws that many candidate features per node (random
    forest behaviour); ``sample_weight`` switches splitting and leaf votes
    to weighted statistics while ``min_leaf`` stays a row count.
    """
    codes = design.codes
    y = np.asarray(y, dtype=np.int64)
    n_total = codes.shape[0]
    k = design.n_features
    weighted = sample_weight is not None
    w = np.asarray(sample_weight, dtype=float) if weighted else np.ones(n_total)
    if max_depth is None:
        max_depth = np.iinfo(np.int32).max
    if max_features is None or max_features >= k:
        max_features = k
        fixed_candidates = np.arange(k)
    else:
        fixed_candidates = None

    feature, threshold, left, right, frac = [], [], [], [], []

    def new_node():
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        frac.append(0.0)
        return len(feature) - 1

    root = new_node()
    stack = [(root, rows, 0)]
    while stack:
        node, node_rows, depth = stack.pop()
        yw = w[node_rows]
        w1 = float(yw @ y[node_rows])
        wt = float(yw.sum())
        frac[node] = w1 / wt if wt > 0 else 0.0
        if depth >= max_depth or len(node_rows) < 2 * min_leaf or w1 <= 0.0 or w1 >= wt:
            continue
        if fixed_candidates is not None:
            candidates = fixed_candidates
        else:
            candidates = rng.choice(k, size=max_features, replace=False)
        split = _best_split(
            codes, design.n_bins, y, w, counts_needed=weighted or min_leaf > 1,
            rows=node_rows, candidates=candidates, min_leaf=min_leaf,
        )
        if split is None:
            continue
        f, t = split
        mask = codes[node_rows, f] <= t
        feature[node] = f
        threshold[node] = float(design.thresholds[f][t])
        lid, rid = new_node(), new_node()
        left[node], right[node] = lid, rid
        stack.append((lid, node_rows[mask], depth + 1))
        stack.append((rid, node_rows[~mask], depth + 1))

    return Tree(
        feature=np.array(feature, dtype=np.int32),
        threshold=np.array(threshold, dtype=float),
        left=np.array(left, dtype=np.int32),
        right=np.array(right, dtype=np.int32),
        pd_fraction=np.array(frac, dtype=float),
    )
