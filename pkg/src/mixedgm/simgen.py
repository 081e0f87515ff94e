"""Benchmark model generation: two typed chains joined by a perfect matching.

Nodes 0..m-1 carry the first type and m..2m-1 the second (m = p/2).  Node j
is connected to its same-type chain neighbours and to node m+j across types.
Edge potentials get Unif(a, b) magnitudes with independent +/- signs.  Two
repairs then enforce strong compatibility where the raw draw can break it:
the Gaussian block is shifted and rescaled to be negative definite with a
-1 diagonal, and Poisson-Poisson potentials are forced non-positive.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .combine import EdgeSet
from .compat import Verdict, check_compatibility
from .core import EdgeMatrix, ModelSpec, NodeParams, NodeType


class GenerationError(RuntimeError):
    """The repaired model still fails strong compatibility."""


@dataclass(frozen=True)
class SimGraphConfig:
    """Settings for one benchmark graph.

    ``alpha1_first_half`` / ``alpha1_second_half`` split the *first type
    block* into two halves (nodes 0..m/2-1 and m/2..m-1); all second-type
    nodes get ``alpha1_second_type``.  Gaussian nodes get alpha2 = -1.
    """

    p: int
    type_pair: tuple[NodeType, NodeType]
    a: float
    b: float
    seed: int = 0
    alpha1_first_half: float = 0.0
    alpha1_second_half: float = 0.0
    alpha1_second_type: float = 0.0

    def __post_init__(self):
        if self.p < 4 or self.p % 2 != 0:
            raise ValueError("p must be even and >= 4")
        if not 0 < self.a <= self.b:
            raise ValueError("need 0 < a <= b")


def chain_cross_edge_set(p: int) -> EdgeSet:
    """Edges {(j,j+1)} within each type block plus the cross matching {(j, m+j)}."""
    if p < 4 or p % 2 != 0:
        raise ValueError("p must be even and >= 4")
    m = p // 2
    pairs = [(j, j + 1) for j in range(m - 1)]
    pairs += [(m + j, m + j + 1) for j in range(m - 1)]
    pairs += [(j, m + j) for j in range(m)]
    return EdgeSet.from_pairs(p, pairs)


def draw_edge_potentials(edges: EdgeSet, config: SimGraphConfig, rng: np.random.Generator) -> EdgeMatrix:
    """Unif(a,b) magnitudes with fair +/- signs on the given edges, zero elsewhere."""
    theta = np.zeros((edges.p, edges.p))
    for s, t in edges.sorted_edges:
        magnitude = rng.uniform(config.a, config.b)
        sign = 1.0 if rng.random() < 0.5 else -1.0
        theta[s, t] = theta[t, s] = sign * magnitude
    return EdgeMatrix(theta)


def repair_gaussian_block(
    theta: np.ndarray, gaussian_indices: Sequence[int], alpha2: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Force the Gaussian block (alpha2 on its diagonal) to be negative definite.

    Already-negative-definite blocks pass through unchanged.  Otherwise the
    block B is replaced by the standardized shift
    T = -B + (min_eigenvalue(B) - 0.1) I,  Ttilde = D^-1/2 T D^-1/2 with
    D = diag(|T_kk|), whose diagonal is exactly -1 and whose eigenvalues are
    all negative.  Returns the updated (theta, alpha2); rows/columns outside
    the Gaussian block are untouched.
    """
    idx = np.asarray(sorted(gaussian_indices), dtype=int)
    theta = np.array(theta, dtype=float)
    alpha2 = np.array(alpha2, dtype=float)
    if idx.size == 0:
        return theta, alpha2
    block = theta[np.ix_(idx, idx)]
    block[np.arange(idx.size), np.arange(idx.size)] = alpha2[idx]
    eigs = np.linalg.eigvalsh(block)
    if eigs.max() < -1e-10:
        return theta, alpha2
    shifted = -block + (eigs.min() - 0.1) * np.eye(idx.size)
    d = np.abs(np.diagonal(shifted))
    standardized = shifted / np.sqrt(np.outer(d, d))
    off = standardized.copy()
    off[np.arange(idx.size), np.arange(idx.size)] = 0.0
    theta[np.ix_(idx, idx)] = off
    alpha2[idx] = -1.0  # T_kk / |T_kk| with T_kk < 0
    return theta, alpha2


def repair_poisson_edges(theta: np.ndarray, poisson_indices: Sequence[int]) -> np.ndarray:
    """Replace every Poisson-Poisson potential with -|value| (idempotent)."""
    theta = np.array(theta, dtype=float)
    idx = np.asarray(sorted(poisson_indices), dtype=int)
    if idx.size:
        sub = np.ix_(idx, idx)
        theta[sub] = -np.abs(theta[sub])
    return theta


def generate_model(config: SimGraphConfig) -> ModelSpec:
    """Draw a strongly compatible benchmark model for the configured type pair."""
    m = config.p // 2
    first, second = config.type_pair
    types = (first,) * m + (second,) * m

    rng = np.random.Generator(np.random.PCG64(config.seed))
    edges = chain_cross_edge_set(config.p)
    theta = draw_edge_potentials(edges, config, rng).theta.copy()

    half = m // 2
    alpha1 = np.empty(config.p)
    alpha1[:half] = config.alpha1_first_half
    alpha1[half:m] = config.alpha1_second_half
    alpha1[m:] = config.alpha1_second_type
    alpha2 = np.where(np.array([ty is NodeType.GAUSSIAN for ty in types]), -1.0, 0.0)

    gaussian_idx = [s for s, ty in enumerate(types) if ty is NodeType.GAUSSIAN]
    poisson_idx = [s for s, ty in enumerate(types) if ty is NodeType.POISSON]
    if gaussian_idx:
        theta, alpha2 = repair_gaussian_block(theta, gaussian_idx, alpha2)
    if len(poisson_idx) >= 2:
        theta = repair_poisson_edges(theta, poisson_idx)

    model = ModelSpec(
        types=types,
        params=tuple(NodeParams(alpha1=float(a1), alpha2=float(a2)) for a1, a2 in zip(alpha1, alpha2)),
        edges=EdgeMatrix(theta),
    )
    report = check_compatibility(model)
    if report.verdict is not Verdict.STRONGLY_COMPATIBLE:
        detail = "; ".join(v.message for v in report.violations)
        raise GenerationError(
            f"generated model is {report.verdict.value} after repairs: {detail}"
        )
    return model
