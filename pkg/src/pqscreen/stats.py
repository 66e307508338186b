"""Rank-based hypothesis tests and comparison statistics.

All routines are pure functions of their sample inputs. Ties are handled
with mid-ranks throughout. P-values that underflow double precision are
reported as 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np
from scipy.special import chdtri, fdtrc, ndtr, ndtri, stdtr, stdtrit

EXACT_SIZE_LIMIT = 25


class StatsError(ValueError):
    """Invalid input to a statistical routine."""


@dataclass(frozen=True)
class TestResult:
    statistic: float
    p_value: float
    method: str

    def __post_init__(self):
        if not (0.0 <= self.p_value <= 1.0):
            raise StatsError(f"p-value {self.p_value} outside [0, 1]")


@dataclass(frozen=True)
class PairwiseComparison:
    group_a: int
    group_b: int
    mean_diff: float
    ci_low: float
    ci_high: float
    significant: bool

    def __post_init__(self):
        if not (self.ci_low <= self.mean_diff <= self.ci_high):
            raise StatsError("interval must contain the mean difference")


def midranks(values: np.ndarray) -> np.ndarray:
    """Ranks 1..n with ties sharing the average rank of their block."""
    values = np.asarray(values, dtype=float)
    order = np.argsort(values, kind="mergesort")
    ranks = np.empty(len(values))
    sorted_vals = values[order]
    i = 0
    while i < len(values):
        j = i
        while j + 1 < len(values) and sorted_vals[j + 1] == sorted_vals[i]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


# ---------------------------------------------------------------------------
# Wilcoxon rank-sum test
# ---------------------------------------------------------------------------

def _tie_term(ranked: np.ndarray) -> float:
    _, counts = np.unique(ranked, return_counts=True)
    return float(np.sum(counts.astype(float) ** 3 - counts))


def _exact_pvalue(doubled_ranks: np.ndarray, n1: int, w2_obs: int) -> float:
    """Two-sided exact p by counting all C(N, n1) rank-subset assignments.

    Works on doubled mid-ranks so every subset sum is an integer; the count
    table is built by dynamic programming over items, which is equivalent
    to full enumeration.
    """
    total = int(doubled_ranks.sum())
    n = len(doubled_ranks)
    # counts[m][s] = number of m-subsets with doubled rank sum s
    counts = np.zeros((n1 + 1, total + 1))
    counts[0][0] = 1.0
    for r in doubled_ranks:
        r = int(r)
        for m in range(min(n1, n), 0, -1):
            counts[m, r:] += counts[m - 1, : total + 1 - r]
    dist = counts[n1]
    n_subsets = dist.sum()
    mu2 = n1 * (n + 1)  # doubled null mean of the rank sum
    dev = abs(w2_obs - mu2)
    sums = np.arange(total + 1)
    extreme = dist[np.abs(sums - mu2) >= dev].sum()
    return float(min(1.0, extreme / n_subsets))


def wilcoxon_rank_sum(
    x: Sequence[float],
    y: Sequence[float],
    mode: str = "approx",
    continuity: bool = True,
) -> TestResult:
    """Two-sided rank-sum test of equal location.

    The statistic is the normal deviate of the first sample's rank sum with
    tie-corrected variance; it is negative when the first sample's ranks
    are low. ``mode="exact"`` computes the p-value by counting every
    assignment of the combined ranks (total size at most 25); ``approx``
    uses the normal approximation with a continuity correction unless
    ``continuity=False``.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(x) == 0 or len(y) == 0:
        raise StatsError("both samples must be non-empty")
    if mode not in ("approx", "exact"):
        raise StatsError(f"unknown mode {mode!r}")
    n1, n2 = len(x), len(y)
    n = n1 + n2
    if mode == "exact" and n > EXACT_SIZE_LIMIT:
        raise StatsError(f"exact mode limited to total size {EXACT_SIZE_LIMIT}, got {n}")

    combined = np.concatenate([x, y])
    ranks = midranks(combined)
    w = float(ranks[:n1].sum())
    mu = n1 * (n + 1) / 2.0
    tie = _tie_term(ranks)
    var = n1 * n2 / 12.0 * ((n + 1) - tie / (n * (n - 1)))

    if var <= 0.0:
        return TestResult(0.0, 1.0, f"wilcoxon-{mode}")

    if mode == "exact":
        doubled = np.round(2.0 * ranks).astype(int)
        p = _exact_pvalue(doubled, n1, int(round(2.0 * w)))
        z = (w - mu) / math.sqrt(var)
        return TestResult(z, p, "wilcoxon-exact")

    delta = w - mu
    if continuity:
        delta = math.copysign(max(abs(delta) - 0.5, 0.0), delta)
    z = delta / math.sqrt(var)
    p = min(1.0, 2.0 * float(ndtr(-abs(z))))
    return TestResult(z, p, "wilcoxon-approx")


# ---------------------------------------------------------------------------
# Spearman correlation
# ---------------------------------------------------------------------------

def spearman(x: Sequence[float], y: Sequence[float]) -> TestResult:
    """Spearman rho (Pearson correlation of mid-ranks) with a t-approximation p."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(x) != len(y):
        raise StatsError("samples must have equal length")
    n = len(x)
    if n < 3:
        raise StatsError("need at least 3 paired values")
    rx, ry = midranks(x), midranks(y)
    sx, sy = rx.std(), ry.std()
    if sx == 0.0 or sy == 0.0:
        raise StatsError("correlation undefined for a constant input")
    rho = float(np.mean((rx - rx.mean()) * (ry - ry.mean())) / (sx * sy))
    rho = max(-1.0, min(1.0, rho))
    if abs(rho) == 1.0:
        return TestResult(rho, 0.0, "spearman")
    t = rho * math.sqrt((n - 2) / (1.0 - rho * rho))
    p = 2.0 * float(stdtr(n - 2, -abs(t)))
    return TestResult(rho, min(1.0, p), "spearman")


# ---------------------------------------------------------------------------
# Studentized range distribution
# ---------------------------------------------------------------------------

_GL_NODES = 64  # per panel; composite Gauss-Legendre


def _gauss_legendre(lo: float, hi: float, panels: int) -> tuple[np.ndarray, np.ndarray]:
    base_x, base_w = np.polynomial.legendre.leggauss(_GL_NODES)
    edges = np.linspace(lo, hi, panels + 1)
    xs, ws = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        xs.append(0.5 * (b - a) * base_x + 0.5 * (a + b))
        ws.append(0.5 * (b - a) * base_w)
    return np.concatenate(xs), np.concatenate(ws)


def _range_cdf(q: np.ndarray, k: int) -> np.ndarray:
    """P(range of k standard normals <= q), vectorized over q."""
    z, wz = _gauss_legendre(-9.0, 9.0, 12)
    q = np.atleast_1d(np.asarray(q, dtype=float))
    inner = ndtr(z)[None, :] - ndtr(z[None, :] - q[:, None])
    inner = np.clip(inner, 0.0, 1.0)
    dens = k * np.exp(-0.5 * z * z) / math.sqrt(2 * math.pi)
    return np.clip((inner ** (k - 1)) @ (dens * wz), 0.0, 1.0)


def _srange_cdf(q: float, k: int, df: float) -> float:
    """CDF of the studentized range with k groups and df error degrees of freedom."""
    if q <= 0.0:
        return 0.0
    if df > 1e5:
        return float(_range_cdf(np.array([q]), k)[0])
    # outer integral over s = chi_df / sqrt(df)
    lo = math.sqrt(chdtri(df, 1.0 - 1e-12) / df)
    hi = math.sqrt(chdtri(df, 1e-12) / df)
    s, ws = _gauss_legendre(max(lo, 1e-9), hi, 12)
    logdens = (
        math.log(2.0)
        + 0.5 * df * math.log(df / 2.0)
        - math.lgamma(df / 2.0)
        + (df - 1.0) * np.log(s)
        - 0.5 * df * s * s
    )
    dens = np.exp(logdens)
    return float(np.clip(np.sum(dens * ws * _range_cdf(q * s, k)), 0.0, 1.0))


@lru_cache(maxsize=256)
def studentized_range_quantile(p: float, k: int, df: float) -> float:
    """Quantile of the studentized range by numerical integration and bisection."""
    if not (0.0 < p < 1.0):
        raise StatsError("quantile level must lie in (0, 1)")
    if k < 2 or df < 1:
        raise StatsError("need k >= 2 groups and df >= 1")
    lo, hi = 1e-6, 4.0
    while _srange_cdf(hi, k, df) < p:
        hi *= 2.0
        if hi > 1e4:
            raise StatsError("studentized range quantile out of range")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if _srange_cdf(mid, k, df) < p:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-7:
            break
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------------------
# One-way ANOVA with Tukey-Kramer post hoc comparisons
# ---------------------------------------------------------------------------

def anova_tukey(
    groups: Sequence[Sequence[float]], alpha: float = 0.05
) -> tuple[TestResult, list[PairwiseComparison]]:
    """One-way ANOVA F-test plus Tukey-Kramer pairwise intervals.

    Intervals use the studentized range quantile at level ``alpha`` with
    the unequal-sample-size (Kramer) standard errors. A pair is flagged
    significant exactly when zero falls outside its interval.
    """
    gs = [np.asarray(g, dtype=float) for g in groups]
    if len(gs) < 2:
        raise StatsError("need at least 2 groups")
    if any(len(g) < 2 for g in gs):
        raise StatsError("each group needs at least 2 values")
    k = len(gs)
    ns = np.array([len(g) for g in gs])
    means = np.array([g.mean() for g in gs])
    n_total = int(ns.sum())
    grand = float(np.concatenate(gs).mean())
    ss_between = float(np.sum(ns * (means - grand) ** 2))
    ss_within = float(sum(np.sum((g - m) ** 2) for g, m in zip(gs, means)))
    df_b, df_w = k - 1, n_total - k

    if ss_within == 0.0 and np.allclose(means, means[0]):
        raise StatsError("degenerate input: zero variance everywhere and equal means")

    if ss_within == 0.0:
        f_stat, p = math.inf, 0.0
    else:
        f_stat = (ss_between / df_b) / (ss_within / df_w)
        p = float(fdtrc(df_b, df_w, f_stat))
    result = TestResult(f_stat, min(1.0, max(0.0, p)), "anova")

    mse = ss_within / df_w
    q_crit = studentized_range_quantile(1.0 - alpha, k, float(df_w))
    comparisons = []
    for i in range(k):
        for j in range(i + 1, k):
            diff = float(means[i] - means[j])
            hw = q_crit * math.sqrt(mse / 2.0 * (1.0 / ns[i] + 1.0 / ns[j]))
            lo, hi = diff - hw, diff + hw
            comparisons.append(
                PairwiseComparison(i, j, diff, lo, hi, significant=not (lo <= 0.0 <= hi))
            )
    return result, comparisons


def ci95(values: Sequence[float]) -> tuple[float, float]:
    """Two-sided 95% t-interval for the mean: mean +/- t(.975, n-1) * SD / sqrt(n)."""
    v = np.asarray(values, dtype=float)
    if len(v) < 2:
        raise StatsError("need at least 2 values")
    n = len(v)
    mean = float(v.mean())
    sd = float(v.std(ddof=1))
    half = float(stdtrit(n - 1, 0.975)) * sd / math.sqrt(n)
    return mean - half, mean + half


def normal_quantile(p: float) -> float:
    return float(ndtri(p))
