"""Per-node l1-penalized conditional-likelihood fits, paths, and BIC tuning.

Each node s is regressed on all others by minimizing

    -loglik_s(theta_s, alpha1) + lambda * || diag(w) theta_s ||_1

with the intercept alpha1 unpenalized.  One solver covers all four node
families: proximal gradient with a backtracking line search (step halved on
objective increase or domain violation) and a soft-threshold proximal step,
which yields exact zeros.  Gaussian targets use the unit-variance canonical
conditional (alpha2 = -1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .core import (
    Dataset,
    DomainError,
    NodeType,
    conditional_loglik,
    log_partition,
)

# Weight given to zero-variance regressor columns: large enough that any
# positive lambda forces the coefficient to exactly 0.
SENTINEL_WEIGHT = 1e100


@dataclass(frozen=True)
class FitConfig:
    """Solver and path settings.

    ``lambda_grid`` (strictly positive, strictly descending) overrides the
    generated grid; otherwise ``n_lambdas`` values are log-spaced from the
    per-type lambda_max down to ``lambda_min_ratio`` times it.
    """

    lambda_grid: tuple[float, ...] | None = None
    n_lambdas: int = 50
    lambda_min_ratio: float = 0.01
    weighted: bool = True
    tol: float = 1e-6
    max_iter: int = 10000
    step_shrink: float = 0.5
    track_objective: bool = False

    def __post_init__(self):
        if self.lambda_grid is not None:
            g = tuple(float(v) for v in self.lambda_grid)
            if any(v <= 0 for v in g):
                raise ValueError("lambda_grid values must be strictly positive")
            if any(a <= b for a, b in zip(g, g[1:])):
                raise ValueError("lambda_grid must be strictly descending")
            object.__setattr__(self, "lambda_grid", g)
        if not 0 < self.step_shrink < 1:
            raise ValueError("step_shrink must lie in (0, 1)")


@dataclass(frozen=True)
class NeighborhoodFit:
    """Estimate for one node: coefficients over the other p-1 nodes plus intercept."""

    s: int
    theta_hat: np.ndarray
    alpha1_hat: float
    lam: float
    objective: float
    iterations: int
    converged: bool
    excluded: tuple[int, ...] = ()
    objective_history: tuple[float, ...] | None = None

    def __post_init__(self):
        th = np.asarray(self.theta_hat, dtype=float).copy()
        th.flags.writeable = False
        object.__setattr__(self, "theta_hat", th)


@dataclass(frozen=True)
class PathFit:
    """Warm-started fits for several nodes over per-type lambda grids.

    ``fits[s][k]`` is node s's fit at ``grids[types[s]][k]``; ``bic[i, k]``
    is the BIC of ``fits[nodes[i]][k]``.
    """

    nodes: tuple[int, ...]
    types: tuple[NodeType, ...]
    fits: Mapping[int, tuple[NeighborhoodFit, ...]]
    grids: Mapping[NodeType, np.ndarray]
    bic: np.ndarray


def _design(data: Dataset, s: int) -> tuple[np.ndarray, np.ndarray]:
    return np.delete(data.x, s, axis=1), data.x[:, s]


def penalty_weights(data: Dataset, s: int) -> np.ndarray:
    """Empirical standard deviations (ddof=1) of the regressor columns.

    Zero-variance columns get ``SENTINEL_WEIGHT`` so that any lambda > 0
    excludes them; affected node indices are reported on the fit.
    """
    if data.n < 2:
        raise ValueError("penalty weights need n >= 2")
    x0, _ = _design(data, s)
    sd = x0.std(axis=0, ddof=1)
    scale = np.maximum(1.0, np.abs(x0.mean(axis=0)))
    return np.where(sd <= 1e-12 * scale, SENTINEL_WEIGHT, sd)


def _other_nodes(p: int, s: int) -> np.ndarray:
    return np.concatenate((np.arange(s), np.arange(s + 1, p)))


class _NodeProblem:
    """Cached design and smooth-loss oracle for one node's regression."""

    def __init__(self, data: Dataset, s: int, weighted: bool):
        self.s = s
        self.node_type = data.types[s]
        self.x0, self.y = _design(data, s)
        self.n = data.n
        if weighted:
            self.weights = penalty_weights(data, s)
        else:
            self.weights = np.ones(self.x0.shape[1])
        self.excluded = tuple(
            int(t) for t in _other_nodes(data.p, s)[self.weights >= SENTINEL_WEIGHT]
        )
        # Constant making loss + base_const the exact negative mean loglik.
        y = self.y
        if self.node_type is NodeType.GAUSSIAN:
            self.base_const = 0.5 * float(np.mean(y * y)) + 0.5 * math.log(2.0 * math.pi)
        elif self.node_type is NodeType.POISSON:
            m = int(y.max(initial=0))
            logfact = np.concatenate(([0.0], np.cumsum(np.log(np.arange(1, m + 1)))))
            self.base_const = float(np.mean(logfact[y.astype(int)]))
        else:
            self.base_const = 0.0

    def eta(self, theta: np.ndarray, alpha: float) -> np.ndarray:
        return alpha + self.x0 @ theta

    def loss(self, theta: np.ndarray, alpha: float) -> float:
        """Negative mean conditional loglik up to base_const; +inf if infeasible."""
        eta = self.eta(theta, alpha)
        ty = self.node_type
        if ty is NodeType.GAUSSIAN:
            val = np.mean(0.5 * eta * eta - eta * self.y)
        elif ty is NodeType.BERNOULLI:
            a = np.abs(eta)
            val = np.mean(a + np.log1p(np.exp(-2.0 * a)) - eta * self.y)
        elif ty is NodeType.POISSON:
            with np.errstate(over="ignore"):
                val = np.mean(np.exp(eta) - eta * self.y)
        else:
            if np.any(eta >= 0):
                return math.inf
            val = np.mean(-np.log(-eta) - eta * self.y)
        return float(val) if np.isfinite(val) else math.inf

    def grad(self, theta: np.ndarray, alpha: float) -> tuple[np.ndarray, float]:
        """Gradient of ``loss`` w.r.t. (theta, alpha)."""
        eta = self.eta(theta, alpha)
        ty = self.node_type
        if ty is NodeType.GAUSSIAN:
            d1 = eta
        elif ty is NodeType.BERNOULLI:
            d1 = np.tanh(eta)
        elif ty is NodeType.POISSON:
            d1 = np.exp(eta)
        else:
            d1 = -1.0 / eta
        resid = d1 - self.y
        return self.x0.T @ resid / self.n, float(resid.mean())

    def intercept_mle(self) -> float:
        """Closed-form minimizer of the intercept-only loss (clipped when degenerate)."""
        ybar = float(self.y.mean())
        ty = self.node_type
        if ty is NodeType.GAUSSIAN:
            return ybar
        if ty is NodeType.BERNOULLI:
            return float(np.arctanh(np.clip(ybar, -1 + 1e-15, 1 - 1e-15)))
        if ty is NodeType.POISSON:
            return math.log(ybar) if ybar > 1e-17 else -40.0
        return -1.0 / ybar

    def start(self) -> tuple[np.ndarray, float]:
        alpha = self.intercept_mle()
        if self.node_type is NodeType.EXPONENTIAL:
            alpha = min(-1.0, alpha)  # eta = alpha < 0 guaranteed at theta = 0
        return np.zeros(self.x0.shape[1]), alpha


def soft_threshold(v: np.ndarray, t: np.ndarray) -> np.ndarray:
    return np.sign(v) * np.maximum(np.abs(v) - t, 0.0)


def kkt_residual(
    g_theta: np.ndarray, g_alpha: float, theta: np.ndarray, lam: float, weights: np.ndarray
) -> float:
    """Max violation of the subgradient optimality conditions at (theta, alpha)."""
    at_zero = np.maximum(np.abs(g_theta) - lam * weights, 0.0)
    active = np.abs(g_theta + lam * weights * np.sign(theta))
    r = np.where(theta == 0.0, at_zero, active)
    return float(max(r.max(initial=0.0), abs(g_alpha)))


def _solve(
    prob: _NodeProblem, lam: float, config: FitConfig, theta0: np.ndarray, alpha0: float
) -> NeighborhoodFit:
    w = prob.weights
    theta = np.asarray(theta0, dtype=float).copy()
    alpha = float(alpha0)
    loss = prob.loss(theta, alpha)
    if not math.isfinite(loss):
        raise DomainError(f"no feasible starting point for node {prob.s}")
    obj = loss + lam * float(np.abs(theta) @ w)
    history = [obj] if config.track_objective else None

    step = 1.0
    steps_taken = 0
    converged = False
    g_theta, g_alpha = prob.grad(theta, alpha)
    for _ in range(config.max_iter):
        if kkt_residual(g_theta, g_alpha, theta, lam, w) <= 0.9 * config.tol:
            converged = True
            break
        accepted = False
        while step > 1e-20:
            theta_new = soft_threshold(theta - step * g_theta, step * lam * w)
            alpha_new = alpha - step * g_alpha
            obj_new = prob.loss(theta_new, alpha_new) + lam * float(np.abs(theta_new) @ w)
            if obj_new <= obj:
                accepted = True
                break
            step *= config.step_shrink
        if not accepted:
            break
        theta, alpha, obj = theta_new, alpha_new, obj_new
        steps_taken += 1
        if history is not None:
            history.append(obj)
        step = min(step / config.step_shrink, 1e8)
        g_theta, g_alpha = prob.grad(theta, alpha)
    else:
        converged = kkt_residual(g_theta, g_alpha, theta, lam, w) <= 0.9 * config.tol

    return NeighborhoodFit(
        s=prob.s,
        theta_hat=theta,
        alpha1_hat=alpha,
        lam=lam,
        objective=obj + prob.base_const,
        iterations=steps_taken,
        converged=converged,
        excluded=prob.excluded,
        objective_history=tuple(history) if history is not None else None,
    )


def fit_node(
    data: Dataset,
    s: int,
    lam: float,
    config: FitConfig = FitConfig(),
    warm_start: NeighborhoodFit | tuple[np.ndarray, float] | None = None,
) -> NeighborhoodFit:
    """Solve one node's penalized regression at a single lambda."""
    if lam < 0:
        raise ValueError("lambda must be >= 0")
    prob = _NodeProblem(data, s, config.weighted)
    if warm_start is None:
        theta0, alpha0 = prob.start()
    elif isinstance(warm_start, NeighborhoodFit):
        theta0, alpha0 = warm_start.theta_hat, warm_start.alpha1_hat
    else:
        theta0, alpha0 = warm_start
    return _solve(prob, lam, config, np.asarray(theta0, dtype=float), float(alpha0))


def lambda_max(data: Dataset, s: int, weighted: bool = True) -> float:
    """Smallest lambda at which the all-zero coefficient vector is optimal."""
    prob = _NodeProblem(data, s, weighted)
    theta0 = np.zeros(prob.x0.shape[1])
    g_theta, _ = prob.grad(theta0, prob.intercept_mle())
    finite = prob.weights < SENTINEL_WEIGHT
    if not finite.any():
        return 0.0
    return float(np.max(np.abs(g_theta[finite]) / prob.weights[finite]))


def fit_node_path(
    data: Dataset,
    s: int,
    lambdas: Sequence[float],
    config: FitConfig = FitConfig(),
) -> tuple[NeighborhoodFit, ...]:
    """Warm-started fits for one node along a descending lambda sequence."""
    prob = _NodeProblem(data, s, config.weighted)
    theta, alpha = prob.start()
    fits = []
    for lam in lambdas:
        fit = _solve(prob, float(lam), config, theta, alpha)
        theta, alpha = fit.theta_hat, fit.alpha1_hat
        fits.append(fit)
    return tuple(fits)


def lambda_grid_for(
    data: Dataset, nodes: Iterable[int], config: FitConfig = FitConfig()
) -> np.ndarray:
    """Descending log-spaced grid from the largest lambda_max among ``nodes``."""
    if config.lambda_grid is not None:
        return np.asarray(config.lambda_grid, dtype=float)
    lmax = max(lambda_max(data, s, config.weighted) for s in nodes)
    lmax = max(lmax, 1e-12)
    return np.geomspace(lmax, config.lambda_min_ratio * lmax, config.n_lambdas)


def bic(fit: NeighborhoodFit, data: Dataset) -> float:
    """-2n * loglik + log(n) * (number of nonzero coefficients)."""
    ll = conditional_loglik(data.types[fit.s], fit.theta_hat, fit.alpha1_hat, data, fit.s)
    return -2.0 * data.n * ll + math.log(data.n) * int(np.count_nonzero(fit.theta_hat))


def fit_path(
    data: Dataset, config: FitConfig = FitConfig(), nodes: Sequence[int] | None = None
) -> PathFit:
    """Fit every requested node over its type's common lambda grid."""
    node_list = tuple(range(data.p)) if nodes is None else tuple(nodes)
    grids: dict[NodeType, np.ndarray] = {}
    for ty in dict.fromkeys(data.types[s] for s in node_list):
        members = [s for s in node_list if data.types[s] is ty]
        grids[ty] = lambda_grid_for(data, members, config)
    fits: dict[int, tuple[NeighborhoodFit, ...]] = {}
    n_lams = len(next(iter(grids.values())))
    bic_matrix = np.empty((len(node_list), n_lams))
    for i, s in enumerate(node_list):
        fits[s] = fit_node_path(data, s, grids[data.types[s]], config)
        bic_matrix[i] = [bic(f, data) for f in fits[s]]
    return PathFit(
        nodes=node_list,
        types=tuple(data.types[s] for s in node_list),
        fits=fits,
        grids=grids,
        bic=bic_matrix,
    )


def select_lambda_by_type(path: PathFit, types: Sequence[NodeType]) -> dict[NodeType, float]:
    """Per type, the grid lambda minimizing the summed BIC over that type's nodes.

    Ties break toward the larger lambda (grids are descending, so toward the
    first index).
    """
    out: dict[NodeType, float] = {}
    for ty, grid in path.grids.items():
        rows = [i for i, s in enumerate(path.nodes) if types[s] is ty]
        total = path.bic[rows].sum(axis=0)
        out[ty] = float(grid[int(np.argmin(total))])
    return out


def estimated_neighborhood(fit: NeighborhoodFit) -> frozenset[int]:
    """Node indices with exactly nonzero coefficients."""
    p = fit.theta_hat.shape[0] + 1
    others = _other_nodes(p, fit.s)
    return frozenset(int(t) for t in others[fit.theta_hat != 0.0])
