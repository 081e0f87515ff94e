"""Merging per-node neighbourhood estimates into one undirected edge set.

Neighbourhood regressions give asymmetric evidence: node s may select t
while t does not select s.  The classic fixes are the intersection (AND) and
union (OR) rules.  For a pair of *different* non-Gaussian types there is a
better option: recovery is provably easier from one side, depending on
plug-in bounds for the Poisson conditional rate (b_P) and the exponential
natural-parameter margin (b_E), so that side's neighbourhood alone should
decide the edge.  Gaussian-vs-non-Gaussian pairs always defer to the
Gaussian side.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .core import ModelSpec, NodeType
from .fit import NeighborhoodFit, estimated_neighborhood


@dataclass(frozen=True)
class EdgeSet:
    """Undirected edges over p nodes; pairs stored canonically (min, max)."""

    p: int
    edges: frozenset[tuple[int, int]]

    def __post_init__(self):
        canon = set()
        for s, t in self.edges:
            if s == t:
                raise ValueError(f"self-loop ({s},{t}) not allowed")
            if not (0 <= s < self.p and 0 <= t < self.p):
                raise ValueError(f"edge ({s},{t}) out of range for p={self.p}")
            canon.add((min(s, t), max(s, t)))
        object.__setattr__(self, "edges", frozenset(canon))

    @classmethod
    def from_pairs(cls, p: int, pairs) -> "EdgeSet":
        return cls(p=p, edges=frozenset(tuple(e) for e in pairs))

    @classmethod
    def from_theta(cls, theta: np.ndarray) -> "EdgeSet":
        """Support of a symmetric edge matrix."""
        th = np.asarray(theta)
        s_idx, t_idx = np.nonzero(th)
        return cls.from_pairs(th.shape[0], ((int(a), int(b)) for a, b in zip(s_idx, t_idx) if a < b))

    def __contains__(self, pair) -> bool:
        s, t = pair
        return (min(s, t), max(s, t)) in self.edges

    def __len__(self) -> int:
        return len(self.edges)

    @property
    def sorted_edges(self) -> list[tuple[int, int]]:
        return sorted(self.edges)

    def restrict(self, keep) -> "EdgeSet":
        """Edges whose endpoint pair satisfies keep(s, t)."""
        return EdgeSet.from_pairs(self.p, (e for e in self.edges if keep(*e)))


@dataclass(frozen=True)
class BoundEstimates:
    """Per-node recovery-difficulty bounds.

    ``poisson[s]``: upper bound on the conditional rate exp(eta_s) of Poisson
    node s (always positive).  ``exponential[s]``: lower margin of |eta_s|
    away from zero for exponential node s (may be <= 0; the selection rules
    handle that).
    """

    poisson: Mapping[int, float] = field(default_factory=dict)
    exponential: Mapping[int, float] = field(default_factory=dict)


def combine_and(neighborhoods: Sequence[frozenset[int]]) -> EdgeSet:
    """Edge (s,t) iff s selects t and t selects s."""
    p = len(neighborhoods)
    return EdgeSet.from_pairs(
        p,
        (
            (s, t)
            for s in range(p)
            for t in neighborhoods[s]
            if t > s and s in neighborhoods[t]
        ),
    )


def combine_or(neighborhoods: Sequence[frozenset[int]]) -> EdgeSet:
    """Edge (s,t) iff s selects t or t selects s."""
    p = len(neighborhoods)
    return EdgeSet.from_pairs(
        p, ((s, t) for s in range(p) for t in neighborhoods[s] if t != s)
    )


def _bernoulli_mass(theta_row: np.ndarray, types: Sequence[NodeType], s: int) -> float:
    return float(
        sum(abs(theta_row[t]) for t, ty in enumerate(types) if ty is NodeType.BERNOULLI and t != s)
    )


def estimate_bounds(
    fits: Mapping[int, NeighborhoodFit], types: Sequence[NodeType]
) -> BoundEstimates:
    """Plug-in bounds from each Poisson/exponential node's own fitted parameters.

    b_P = exp(alpha1 + sum over Bernoulli nodes of |theta|);
    b_E = |alpha1| - the same sum.
    """
    poisson: dict[int, float] = {}
    exponential: dict[int, float] = {}
    p = len(types)
    for s, ty in enumerate(types):
        if ty not in (NodeType.POISSON, NodeType.EXPONENTIAL):
            continue
        fit = fits[s]
        full = np.zeros(p)
        others = np.concatenate((np.arange(s), np.arange(s + 1, p)))
        full[others] = fit.theta_hat
        mass = _bernoulli_mass(full, types, s)
        if ty is NodeType.POISSON:
            poisson[s] = math.exp(fit.alpha1_hat + mass)
        else:
            exponential[s] = abs(fit.alpha1_hat) - mass
    return BoundEstimates(poisson=poisson, exponential=exponential)


def true_bounds(model: ModelSpec) -> BoundEstimates:
    """Same bounds computed from a model's true parameters."""
    poisson: dict[int, float] = {}
    exponential: dict[int, float] = {}
    for s, ty in enumerate(model.types):
        if ty not in (NodeType.POISSON, NodeType.EXPONENTIAL):
            continue
        mass = _bernoulli_mass(model.theta[s], model.types, s)
        if ty is NodeType.POISSON:
            poisson[s] = math.exp(model.params[s].alpha1 + mass)
        else:
            exponential[s] = abs(model.params[s].alpha1) - mass
    return BoundEstimates(poisson=poisson, exponential=exponential)


def preferred_node(
    s: int, t: int, types: Sequence[NodeType], bounds: BoundEstimates
) -> int | None:
    """Which endpoint's neighbourhood should decide the edge, or None.

    None means the pair is same-type or the bounds give no clear preference
    (boundary and conflicting cases included); callers fall back to AND/OR.
    """
    ts, tt = types[s], types[t]
    if ts is tt:
        return None
    if ts is NodeType.GAUSSIAN:
        return s
    if tt is NodeType.GAUSSIAN:
        return t
    pair = frozenset((ts, tt))
    if pair == frozenset((NodeType.POISSON, NodeType.EXPONENTIAL)):
        pois, expo = (s, t) if ts is NodeType.POISSON else (t, s)
        b_p = bounds.poisson[pois]
        b_e = bounds.exponential[expo]
        if b_e**2 * b_p < 1 and b_e**3 * b_p < 2:
            return pois
        if b_e**2 * b_p > 1 and b_e**3 * b_p > 2:
            return expo
        return None
    if pair == frozenset((NodeType.POISSON, NodeType.BERNOULLI)):
        pois, bern = (s, t) if ts is NodeType.POISSON else (t, s)
        b_p = bounds.poisson[pois]
        if b_p < 1:
            return pois
        if b_p > 2:
            return bern
        return None
    # exponential & Bernoulli: always decided
    expo, bern = (s, t) if ts is NodeType.EXPONENTIAL else (t, s)
    return expo if bounds.exponential[expo] >= 1 else bern


def select_edge_estimate(
    s: int,
    t: int,
    types: Sequence[NodeType],
    bounds: BoundEstimates,
    neighborhoods: Sequence[frozenset[int]],
    fallback: str = "or",
) -> bool:
    """Decide one edge using the preferred endpoint, or the fallback rule."""
    chosen = preferred_node(s, t, types, bounds)
    if chosen is not None:
        other = t if chosen == s else s
        return other in neighborhoods[chosen]
    if fallback == "and":
        return t in neighborhoods[s] and s in neighborhoods[t]
    if fallback == "or":
        return t in neighborhoods[s] or s in neighborhoods[t]
    raise ValueError(f"unknown fallback rule {fallback!r}")


def combine_with_selection_rules(
    fits: Mapping[int, NeighborhoodFit],
    types: Sequence[NodeType],
    fallback: str = "or",
    bounds: BoundEstimates | None = None,
) -> EdgeSet:
    """Apply the type-aware decision to every pair; fallback elsewhere.

    ``bounds`` defaults to plug-in estimates from the fits themselves; pass
    ``true_bounds(model)`` to use known parameters instead.
    """
    p = len(types)
    if bounds is None:
        bounds = estimate_bounds(fits, types)
    neighborhoods = [estimated_neighborhood(fits[s]) for s in range(p)]
    edges = [
        (s, t)
        for s in range(p)
        for t in range(s + 1, p)
        if select_edge_estimate(s, t, types, bounds, neighborhoods, fallback)
    ]
    return EdgeSet.from_pairs(p, edges)
