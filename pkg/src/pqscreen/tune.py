"""Bayesian optimization over bounded hyperparameter boxes.

A Gaussian-process surrogate with a squared-exponential kernel and
per-dimension length-scales is refitted after every evaluation by marginal
likelihood maximization; the next point maximizes expected improvement,
located by random multistart plus local refinement. Log-scaled dimensions
are optimized in log space and integer dimensions are rounded at
evaluation time. Fully deterministic for a fixed seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

import numpy as np
from scipy import optimize
from scipy.special import ndtr
from scipy.stats import qmc

NOISE_FLOOR = 1e-6
DEFAULT_BUDGET = 30
EI_CANDIDATES = 1000


class TuneError(ValueError):
    """Invalid search space or failed optimization."""


@dataclass(frozen=True)
class Dimension:
    name: str
    low: float
    high: float
    scale: str = "linear"
    integer: bool = False

    def __post_init__(self):
        if self.low >= self.high:
            raise TuneError(f"{self.name}: low must be below high")
        if self.scale not in ("linear", "log"):
            raise TuneError(f"{self.name}: scale must be linear or log")
        if self.scale == "log" and self.low <= 0:
            raise TuneError(f"{self.name}: log scale requires low > 0")


@dataclass(frozen=True)
class SearchSpace:
    dimensions: tuple[Dimension, ...]

    def __post_init__(self):
        object.__setattr__(self, "dimensions", tuple(self.dimensions))
        if not self.dimensions:
            raise TuneError("search space needs at least one dimension")

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(d.name for d in self.dimensions)

    def __len__(self) -> int:
        return len(self.dimensions)

    def from_unit(self, u: np.ndarray) -> dict:
        """Map a unit-box vector to parameter values (integers rounded)."""
        out = {}
        for ui, d in zip(np.clip(u, 0.0, 1.0), self.dimensions):
            if d.scale == "log":
                v = math.exp(math.log(d.low) + ui * (math.log(d.high) - math.log(d.low)))
            else:
                v = d.low + ui * (d.high - d.low)
            if d.integer:
                v = int(min(max(round(v), math.ceil(d.low)), math.floor(d.high)))
            else:
                v = float(min(max(v, d.low), d.high))
            out[d.name] = v
        return out

    def to_unit(self, point: Mapping[str, float]) -> np.ndarray:
        u = np.empty(len(self.dimensions))
        for i, d in enumerate(self.dimensions):
            v = float(point[d.name])
            if d.scale == "log":
                u[i] = (math.log(v) - math.log(d.low)) / (math.log(d.high) - math.log(d.low))
            else:
                u[i] = (v - d.low) / (d.high - d.low)
        return np.clip(u, 0.0, 1.0)

    def contains(self, point: Mapping[str, float]) -> bool:
        return all(d.low <= point[d.name] <= d.high for d in self.dimensions)


@dataclass(frozen=True)
class TuneResult:
    best_point: dict
    best_objective: float
    history: tuple

    def __post_init__(self):
        vals = [v for _, v in self.history]
        if vals and self.best_objective != min(vals):
            raise TuneError("best objective must be the minimum of the history")


# ---------------------------------------------------------------------------
# Gaussian process surrogate
# ---------------------------------------------------------------------------

def _kernel(A, B, lengthscales, signal_var):
    d = (A[:, None, :] - B[None, :, :]) / lengthscales
    return signal_var * np.exp(-0.5 * np.sum(d * d, axis=2))


class _GP:
    def __init__(self, X, y):
        self.X = X
        self.y_mean = float(y.mean())
        self.y_sd = float(y.std()) or 1.0
        self.y = (y - self.y_mean) / self.y_sd
        self.n, self.d = X.shape
        self._fit_hyperparameters()

    def _nll_and_grad(self, theta):
        ls = np.exp(theta[: self.d])
        sf = math.exp(theta[self.d])
        sn = math.exp(theta[self.d + 1]) + NOISE_FLOOR
        K = _kernel(self.X, self.X, ls, sf) + sn * np.eye(self.n)
        try:
            L = np.linalg.cholesky(K)
        except np.linalg.LinAlgError:
            return 1e12, np.zeros_like(theta)
        alpha = np.linalg.solve(L.T, np.linalg.solve(L, self.y))
        nll = (
            0.5 * float(self.y @ alpha)
            + float(np.log(np.diag(L)).sum())
            + 0.5 * self.n * math.log(2 * math.pi)
        )
        Kinv = np.linalg.solve(L.T, np.linalg.solve(L, np.eye(self.n)))
        W = np.outer(alpha, alpha) - Kinv
        Kse = K - sn * np.eye(self.n)
        grad = np.empty_like(theta)
        for j in range(self.d):
            diff = self.X[:, j][:, None] - self.X[:, j][None, :]
            dK = Kse * (diff * diff) / ls[j] ** 2
            grad[j] = -0.5 * float(np.sum(W * dK))
        grad[self.d] = -0.5 * float(np.sum(W * Kse))
        grad[self.d + 1] = -0.5 * float(np.trace(W)) * (sn - NOISE_FLOOR)
        return nll, grad

    def _fit_hyperparameters(self):
        d = self.d
        bounds = [(math.log(5e-3), math.log(10.0))] * d
        bounds += [(math.log(1e-3), math.log(1e3)), (math.log(1e-8), math.log(1.0))]
        starts = [
            np.concatenate([np.full(d, math.log(0.3)), [0.0, math.log(1e-4)]]),
            np.concatenate([np.full(d, math.log(1.0)), [0.0, math.log(1e-2)]]),
        ]
        best = None
        for x0 in starts:
            res = optimize.minimize(
                self._nll_and_grad, x0, jac=True, method="L-BFGS-B", bounds=bounds
            )
            if best is None or res.fun < best.fun:
                best = res
        theta = best.x
        self.lengthscales = np.exp(theta[: d])
        self.signal_var = math.exp(theta[d])
        self.noise_var = math.exp(theta[d + 1]) + NOISE_FLOOR
        K = _kernel(self.X, self.X, self.lengthscales, self.signal_var)
        K += self.noise_var * np.eye(self.n)
        self._L = np.linalg.cholesky(K)
        self._alpha = np.linalg.solve(self._L.T, np.linalg.solve(self._L, self.y))

    def posterior(self, Xq):
        Ks = _kernel(Xq, self.X, self.lengthscales, self.signal_var)
        mu = Ks @ self._alpha
        v = np.linalg.solve(self._L, Ks.T)
        var = self.signal_var - np.sum(v * v, axis=0)
        return mu, np.sqrt(np.maximum(var, 1e-18))

    def predict_raw(self, Xq):
        mu, sd = self.posterior(Xq)
        return mu * self.y_sd + self.y_mean, sd * self.y_sd


def expected_improvement(mu, sd, best) -> np.ndarray:
    """Closed-form EI for minimization; non-negative by construction."""
    mu = np.atleast_1d(mu)
    sd = np.atleast_1d(sd)
    improve = best - mu
    out = np.maximum(improve, 0.0)
    ok = sd > 0
    z = improve[ok] / sd[ok]
    phi = np.exp(-0.5 * z * z) / math.sqrt(2 * math.pi)
    out[ok] = improve[ok] * ndtr(z) + sd[ok] * phi
    return np.maximum(out, 0.0)


# ---------------------------------------------------------------------------
# The optimizer
# ---------------------------------------------------------------------------

def _penalty(values: Sequence[float]) -> float:
    finite = [v for v in values if math.isfinite(v)]
    if not finite:
        return 1e6
    span = max(finite) - min(finite)
    return max(finite) + 2.0 * span + 1.0


def bayes_optimize(
    objective: Callable[[Mapping[str, float]], float],
    space: SearchSpace,
    budget: int = DEFAULT_BUDGET,
    seed: int = 0,
) -> TuneResult:
    """Minimize a black-box objective over the search space.

    Runs a quasi-random initial design of max(5, d+1) points, then
    repeatedly fits the GP surrogate and evaluates the expected-improvement
    maximizer until the evaluation budget is spent. Non-finite objective
    values are recorded with a large penalty and optimization continues.
    """
    d = len(space)
    if budget < d + 2:
        raise TuneError(f"budget must be at least dimensions + 2 = {d + 2}")
    rng = np.random.default_rng(seed)

    history: list[tuple[dict, float]] = []
    units: list[np.ndarray] = []
    values: list[float] = []
    finite_seen = False

    def evaluate(u: np.ndarray):
        nonlocal finite_seen
        point = space.from_unit(u)
        raw = objective(point)
        try:
            raw = float(raw)
        except (TypeError, ValueError):
            raw = math.nan
        if math.isfinite(raw):
            finite_seen = True
        else:
            raw = _penalty(values)
        history.append((point, raw))
        units.append(space.to_unit(point))
        values.append(raw)

    n_init = min(max(5, d + 1), budget)
    sobol = qmc.Sobol(d, scramble=True, seed=rng)
    draws = sobol.random(2 ** math.ceil(math.log2(max(n_init, 1))))
    for u in draws[:n_init]:
        evaluate(u)

    while len(history) < budget:
        gp = _GP(np.array(units), np.array(values))
        best_std = float((min(values) - gp.y_mean) / gp.y_sd)
        cands = rng.random((EI_CANDIDATES, d))
        mu, sd = gp.posterior(cands)
        ei = expected_improvement(mu, sd, best_std)
        start = cands[int(np.argmax(ei))]

        def neg_ei(u):
            m, s = gp.posterior(u[None, :])
            return -float(expected_improvement(m, s, best_std)[0])

        res = optimize.minimize(
            neg_ei, start, method="L-BFGS-B", bounds=[(0.0, 1.0)] * d
        )
        nxt = res.x if res.fun <= neg_ei(start) else start
        evaluate(np.clip(nxt, 0.0, 1.0))

    if not finite_seen:
        raise TuneError("every objective evaluation was non-finite")

    best_idx = int(np.argmin(values))
    return TuneResult(
        best_point=history[best_idx][0],
        best_objective=values[best_idx],
        history=tuple(history),
    )
