"""Domain types and exponential-family machinery for mixed pairwise models.

Every node of the graph carries one of four conditional distributions
(Gaussian, Bernoulli coded as {-1,+1}, Poisson, exponential), all of the
form  p(x_s | x_-s) = exp{ f_s(x_s) + eta_s * x_s - D(eta_s) }  with natural
parameter  eta_s = alpha1_s + sum_{t != s} theta_ts * x_t.  This module holds
the model containers plus the log-partition functions D, their derivatives,
and the node-conditional log-likelihood with its gradient and Hessian.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

LOG_2PI = math.log(2.0 * math.pi)


class DomainError(ValueError):
    """A natural parameter (or data value) left the domain of its family."""


class NodeType(enum.Enum):
    GAUSSIAN = "g"
    BERNOULLI = "b"
    POISSON = "p"
    EXPONENTIAL = "e"

    @property
    def tag(self) -> str:
        return self.value

    @classmethod
    def from_tag(cls, tag: str) -> "NodeType":
        try:
            return cls(tag.strip().lower())
        except ValueError:
            raise ValueError(f"unknown node type tag {tag!r} (expected g/b/p/e)") from None

    def supports(self, values: np.ndarray) -> bool:
        """Whether every entry lies in this type's support."""
        v = np.asarray(values, dtype=float)
        if not np.all(np.isfinite(v)):
            return False
        if self is NodeType.GAUSSIAN:
            return True
        if self is NodeType.BERNOULLI:
            return bool(np.all((v == 1.0) | (v == -1.0)))
        if self is NodeType.POISSON:
            return bool(np.all(v >= 0) and np.all(v == np.floor(v)))
        return bool(np.all(v > 0))  # exponential


@dataclass(frozen=True)
class NodeParams:
    """Node-potential coefficients: linear alpha1 and (Gaussian-only) quadratic alpha2.

    alpha2 is fixed and known, never estimated; it must be 0 for non-Gaussian
    nodes.  Its sign for Gaussian nodes is a compatibility condition and is
    checked by ``compat.check_compatibility`` rather than here.
    """

    alpha1: float
    alpha2: float = 0.0


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=float)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class EdgeMatrix:
    """Dense symmetric p x p edge-potential matrix with zero diagonal."""

    theta: np.ndarray

    def __post_init__(self):
        th = np.asarray(self.theta, dtype=float)
        if th.ndim != 2 or th.shape[0] != th.shape[1]:
            raise ValueError(f"theta must be square, got shape {th.shape}")
        if not np.array_equal(th, th.T):
            raise ValueError("theta must be symmetric")
        if np.any(np.diagonal(th) != 0.0):
            raise ValueError("theta must have a zero diagonal")
        object.__setattr__(self, "theta", _readonly(th))

    @property
    def p(self) -> int:
        return self.theta.shape[0]


@dataclass(frozen=True)
class ModelSpec:
    """Generative truth: node types, node potentials, symmetric edge matrix."""

    types: tuple[NodeType, ...]
    params: tuple[NodeParams, ...]
    edges: EdgeMatrix

    def __post_init__(self):
        object.__setattr__(self, "types", tuple(self.types))
        object.__setattr__(self, "params", tuple(self.params))
        if len(self.types) != len(self.params):
            raise ValueError("types and params must have equal length")
        if len(self.types) != self.edges.p:
            raise ValueError("edge matrix size does not match number of nodes")
        for s, (ty, pa) in enumerate(zip(self.types, self.params)):
            if ty is not NodeType.GAUSSIAN and pa.alpha2 != 0.0:
                raise ValueError(f"node {s}: alpha2 must be 0 for non-Gaussian nodes")

    @property
    def p(self) -> int:
        return len(self.types)

    @property
    def theta(self) -> np.ndarray:
        return self.edges.theta

    @property
    def alpha1(self) -> np.ndarray:
        return np.array([pa.alpha1 for pa in self.params])

    @property
    def alpha2(self) -> np.ndarray:
        return np.array([pa.alpha2 for pa in self.params])


@dataclass(frozen=True)
class Dataset:
    """n x p observation matrix tagged with per-column node types."""

    x: np.ndarray
    types: tuple[NodeType, ...]

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        if x.ndim != 2:
            raise ValueError("x must be a 2-d array")
        object.__setattr__(self, "types", tuple(self.types))
        if x.shape[1] != len(self.types):
            raise ValueError("column count does not match number of node types")
        for j, ty in enumerate(self.types):
            if not ty.supports(x[:, j]):
                raise DomainError(f"column {j} contains values outside the {ty.name} support")
        object.__setattr__(self, "x", _readonly(x))

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def p(self) -> int:
        return self.x.shape[1]


# ---------------------------------------------------------------------------
# Log-partition functions and derivatives
# ---------------------------------------------------------------------------


def _as_float_or_array(value, scalar: bool):
    return float(value) if scalar else value


def log_partition(node_type: NodeType, eta):
    """Log-partition D(eta) of the node-conditional density.

    Gaussian (unit-variance form): eta^2/2 + log(2*pi)/2.
    Bernoulli ({-1,+1} coding):    log(e^eta + e^-eta).
    Poisson:                       exp(eta).
    Exponential (requires eta<0):  -log(-eta).

    Accepts scalars or arrays; raises DomainError for exponential eta >= 0.
    """
    e = np.asarray(eta, dtype=float)
    scalar = e.ndim == 0
    if node_type is NodeType.GAUSSIAN:
        out = 0.5 * e * e + 0.5 * LOG_2PI
    elif node_type is NodeType.BERNOULLI:
        # |eta| + log(1 + exp(-2|eta|)) is overflow-safe
        a = np.abs(e)
        out = a + np.log1p(np.exp(-2.0 * a))
    elif node_type is NodeType.POISSON:
        out = np.exp(e)
    else:
        if np.any(e >= 0):
            raise DomainError("exponential log-partition requires eta < 0")
        out = -np.log(-e)
    return _as_float_or_array(out, scalar)


def log_partition_derivs(node_type: NodeType, eta):
    """First three derivatives (D', D'', D''') of ``log_partition``.

    Gaussian: (eta, 1, 0).  Bernoulli: (tanh eta, sech^2 eta,
    -2 tanh eta sech^2 eta).  Poisson: (e^eta, e^eta, e^eta).
    Exponential: (-1/eta, 1/eta^2, -2/eta^3), eta < 0.
    """
    e = np.asarray(eta, dtype=float)
    scalar = e.ndim == 0
    if node_type is NodeType.GAUSSIAN:
        d1, d2, d3 = e, np.ones_like(e), np.zeros_like(e)
    elif node_type is NodeType.BERNOULLI:
        t = np.tanh(e)
        sech2 = 1.0 - t * t
        d1, d2, d3 = t, sech2, -2.0 * t * sech2
    elif node_type is NodeType.POISSON:
        ex = np.exp(e)
        d1 = d2 = d3 = ex
    else:
        if np.any(e >= 0):
            raise DomainError("exponential log-partition requires eta < 0")
        d1, d2, d3 = -1.0 / e, e**-2.0, -2.0 * e**-3.0
    if scalar:
        return float(d1), float(d2), float(d3)
    return d1, d2, d3


def natural_parameter(model: ModelSpec, s: int, x_minus_s: Sequence[float]) -> float:
    """eta_s = alpha1_s + sum_{t != s} theta_ts x_t for one configuration."""
    if not 0 <= s < model.p:
        raise IndexError(f"node index {s} out of range for p={model.p}")
    x = np.asarray(x_minus_s, dtype=float)
    if x.shape != (model.p - 1,):
        raise ValueError(f"x_minus_s must have length p-1={model.p - 1}")
    col = np.delete(model.theta[:, s], s)
    return float(model.params[s].alpha1 + col @ x)


# ---------------------------------------------------------------------------
# Node-conditional log-likelihood
# ---------------------------------------------------------------------------


def poisson_log_base(y: np.ndarray) -> np.ndarray:
    """-log(y!) for non-negative integer-valued y (the Poisson base measure)."""
    yi = np.asarray(y, dtype=float).astype(int)
    m = int(yi.max(initial=0))
    logfact = np.concatenate(([0.0], np.cumsum(np.log(np.arange(1, m + 1)))))
    return -logfact[yi]


def _design(data: Dataset, s: int) -> tuple[np.ndarray, np.ndarray]:
    if not 0 <= s < data.p:
        raise IndexError(f"node index {s} out of range for p={data.p}")
    return np.delete(data.x, s, axis=1), data.x[:, s]


def conditional_loglik(
    node_type: NodeType,
    theta_s: Sequence[float],
    alpha1: float,
    data: Dataset,
    s: int,
    alpha2: float = -1.0,
) -> float:
    """Average node-conditional log-likelihood (1/n) sum_i log p(x_s^i | x_-s^i).

    Base-measure terms (e.g. -log(x!) for Poisson, the quadratic node
    potential for Gaussian) are included so values are exact log-likelihoods,
    not merely equal up to a constant.  ``alpha2`` is the fixed Gaussian
    quadratic coefficient (must be negative); ignored for other types.
    """
    x0, y = _design(data, s)
    th = np.asarray(theta_s, dtype=float)
    eta = alpha1 + x0 @ th
    if node_type is NodeType.GAUSSIAN:
        if alpha2 >= 0:
            raise DomainError("Gaussian conditional requires alpha2 < 0")
        v = -alpha2  # conditional variance is 1/v
        d = eta * eta / (2.0 * v) + 0.5 * math.log(2.0 * math.pi / v)
        terms = 0.5 * alpha2 * y * y + eta * y - d
    elif node_type is NodeType.BERNOULLI:
        terms = eta * y - log_partition(node_type, eta)
    elif node_type is NodeType.POISSON:
        terms = eta * y + poisson_log_base(y) - np.exp(eta)
    else:
        if np.any(eta >= 0):
            raise DomainError("infeasible parameters: exponential node requires eta < 0 on every row")
        terms = eta * y + np.log(-eta)
    return float(np.mean(terms))


def _mean_derivative(node_type: NodeType, eta: np.ndarray, alpha2: float) -> np.ndarray:
    """D'(eta), using the general-alpha2 Gaussian form eta/(-alpha2)."""
    if node_type is NodeType.GAUSSIAN:
        return eta / (-alpha2)
    return log_partition_derivs(node_type, eta)[0]


def conditional_loglik_gradient(
    node_type: NodeType,
    theta_s: Sequence[float],
    alpha1: float,
    data: Dataset,
    s: int,
    alpha2: float = -1.0,
) -> np.ndarray:
    """Gradient of ``conditional_loglik`` w.r.t. (theta_s, alpha1).

    Coordinate t is (1/n) sum_i (x_s^i - D'(eta_i)) x_t^i; the last entry is
    the intercept coordinate (x_t == 1).
    """
    x0, y = _design(data, s)
    th = np.asarray(theta_s, dtype=float)
    eta = alpha1 + x0 @ th
    if node_type is NodeType.GAUSSIAN and alpha2 >= 0:
        raise DomainError("Gaussian conditional requires alpha2 < 0")
    if node_type is NodeType.EXPONENTIAL and np.any(eta >= 0):
        raise DomainError("infeasible parameters: exponential node requires eta < 0 on every row")
    resid = y - _mean_derivative(node_type, eta, alpha2)
    n = data.n
    return np.concatenate((x0.T @ resid / n, [resid.sum() / n]))


def conditional_neg_hessian(
    node_type: NodeType,
    theta_s: Sequence[float],
    alpha1: float,
    data: Dataset,
    s: int,
    alpha2: float = -1.0,
) -> np.ndarray:
    """Negative Hessian of ``conditional_loglik``: (1/n) sum_i D''(eta_i) x0 x0^T.

    x0 = (x_-s, 1); the intercept coordinate comes last.
    """
    x0, _ = _design(data, s)
    th = np.asarray(theta_s, dtype=float)
    eta = alpha1 + x0 @ th
    if node_type is NodeType.GAUSSIAN:
        if alpha2 >= 0:
            raise DomainError("Gaussian conditional requires alpha2 < 0")
        d2 = np.full_like(eta, 1.0 / (-alpha2))
    else:
        if node_type is NodeType.EXPONENTIAL and np.any(eta >= 0):
            raise DomainError("infeasible parameters: exponential node requires eta < 0 on every row")
        d2 = log_partition_derivs(node_type, eta)[1]
    xa = np.hstack((x0, np.ones((data.n, 1))))
    return (xa * d2[:, None]).T @ xa / data.n
