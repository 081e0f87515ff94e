"""Compatibility checking for conditionally-specified mixed models.

A set of node-conditional densities is *compatible* when some function g can
generate all of them, and *strongly compatible* when that g is integrable,
i.e. a proper joint density exists.  For the four families handled here the
conditions are algebraic restrictions on (theta, alpha); a subset of them
("blocking" rules below) is necessary for compatibility itself, while the
rest are only needed for strong compatibility.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import DomainError, ModelSpec, NodeType, poisson_log_base

# Tolerances: zero-edge tests, strict-inequality guard, eigenvalue guard.
ZERO_TOL = 1e-12
STRICT_TOL = 1e-12
EIG_TOL = 1e-10


class Verdict(enum.Enum):
    INCOMPATIBLE = "incompatible"
    COMPATIBLE_ONLY = "compatible-only"
    STRONGLY_COMPATIBLE = "strongly-compatible"


@dataclass(frozen=True)
class RuleViolation:
    """One violated restriction.

    ``blocks_compatibility`` marks the rules whose failure rules out even a
    generating function (not merely a proper joint density).
    """

    rule: str
    nodes: tuple[int, ...]
    message: str
    blocks_compatibility: bool


@dataclass(frozen=True)
class CompatReport:
    verdict: Verdict
    violations: tuple[RuleViolation, ...]


def _pair_rule(t1: NodeType, t2: NodeType) -> tuple[str, str, bool] | None:
    """(rule-id, constraint, blocking?) for an unordered type pair, or None.

    constraint is "zero" (theta must be 0) or "nonpos" (theta <= 0).
    Bernoulli pairs and Gaussian-Bernoulli edges are unrestricted; the
    exponential-vs-Bernoulli budget and the Gaussian block are handled
    separately.
    """
    pair = frozenset((t1, t2))
    if pair == frozenset((NodeType.GAUSSIAN, NodeType.POISSON)):
        return "gaussian-poisson-zero", "zero", False
    if pair == frozenset((NodeType.GAUSSIAN, NodeType.EXPONENTIAL)):
        return "gaussian-exponential-zero", "zero", True
    if pair == frozenset((NodeType.POISSON,)):
        return "poisson-poisson-nonpos", "nonpos", False
    if pair == frozenset((NodeType.POISSON, NodeType.EXPONENTIAL)):
        return "poisson-exponential-nonpos", "nonpos", True
    if pair == frozenset((NodeType.EXPONENTIAL,)):
        return "exponential-exponential-nonpos", "nonpos", True
    return None


def gaussian_block(model: ModelSpec) -> tuple[list[int], np.ndarray]:
    """Gaussian indices and the block matrix with alpha2 on the diagonal."""
    idx = [s for s, ty in enumerate(model.types) if ty is NodeType.GAUSSIAN]
    block = model.theta[np.ix_(idx, idx)].copy()
    for k, s in enumerate(idx):
        block[k, k] = model.params[s].alpha2
    return idx, block


def check_compatibility(model: ModelSpec) -> CompatReport:
    """Classify a model as incompatible / compatible-only / strongly compatible.

    Any violated blocking rule makes the verdict INCOMPATIBLE; violations of
    the remaining (strong-compatibility-only) rules give COMPATIBLE_ONLY; no
    violations give STRONGLY_COMPATIBLE.
    """
    theta = model.theta
    types = model.types
    violations: list[RuleViolation] = []

    for s, ty in enumerate(types):
        if ty is NodeType.GAUSSIAN and model.params[s].alpha2 > -STRICT_TOL:
            violations.append(
                RuleViolation(
                    "gaussian-alpha2-negative",
                    (s,),
                    f"Gaussian node {s} needs alpha2 < 0, got {model.params[s].alpha2}",
                    True,
                )
            )

    for s, t in itertools.combinations(range(model.p), 2):
        rule = _pair_rule(types[s], types[t])
        if rule is None:
            continue
        rule_id, constraint, blocking = rule
        v = theta[s, t]
        if constraint == "zero" and abs(v) > ZERO_TOL:
            violations.append(
                RuleViolation(rule_id, (s, t), f"edge ({s},{t}) must be exactly 0, got {v}", blocking)
            )
        elif constraint == "nonpos" and v > ZERO_TOL:
            violations.append(
                RuleViolation(rule_id, (s, t), f"edge ({s},{t}) must be <= 0, got {v}", blocking)
            )

    bernoulli = [t for t, ty in enumerate(types) if ty is NodeType.BERNOULLI]
    for s, ty in enumerate(types):
        if ty is not NodeType.EXPONENTIAL:
            continue
        budget = float(sum(abs(theta[s, t]) for t in bernoulli))
        bound = -model.params[s].alpha1
        if not budget <= bound - STRICT_TOL:
            violations.append(
                RuleViolation(
                    "exponential-bernoulli-bound",
                    (s,),
                    f"exponential node {s} needs sum of |theta| over Bernoulli "
                    f"neighbours strictly below -alpha1: {budget} vs {bound}",
                    True,
                )
            )

    gauss_idx, block = gaussian_block(model)
    if len(gauss_idx) >= 1:
        eigs = np.linalg.eigvalsh(block)
        if eigs.max() >= -EIG_TOL:
            violations.append(
                RuleViolation(
                    "gaussian-block-negative-definite",
                    tuple(gauss_idx),
                    f"Gaussian block must be negative definite; largest eigenvalue {eigs.max():.6g}",
                    False,
                )
            )

    if any(v.blocks_compatibility for v in violations):
        verdict = Verdict.INCOMPATIBLE
    elif violations:
        verdict = Verdict.COMPATIBLE_ONLY
    else:
        verdict = Verdict.STRONGLY_COMPATIBLE
    return CompatReport(verdict, tuple(violations))


def joint_unnormalized_logdensity(model: ModelSpec, x: Sequence[float]) -> float:
    """log of the generating function g at x, up to an additive constant.

    g(x) = exp{ sum_s f_s(x_s) + (1/2) sum_s sum_{t != s} theta_ts x_s x_t }.
    Used by integration oracles; raises DomainError on support violations.
    """
    xv = np.asarray(x, dtype=float)
    if xv.shape != (model.p,):
        raise ValueError(f"x must have length p={model.p}")
    total = 0.0
    for s, ty in enumerate(model.types):
        if not ty.supports(xv[s : s + 1]):
            raise DomainError(f"x[{s}]={xv[s]} outside the {ty.name} support")
        pa = model.params[s]
        total += pa.alpha1 * xv[s]
        if ty is NodeType.GAUSSIAN:
            total += 0.5 * pa.alpha2 * xv[s] ** 2
        elif ty is NodeType.POISSON:
            total += float(poisson_log_base(np.array([xv[s]]))[0])
    total += 0.5 * float(xv @ model.theta @ xv)
    return total
