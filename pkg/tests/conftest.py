from __future__ import annotations

import numpy as np
import pytest

from mixedgm.core import Dataset, EdgeMatrix, ModelSpec, NodeParams, NodeType

ALL_TYPES = (NodeType.GAUSSIAN, NodeType.BERNOULLI, NodeType.POISSON, NodeType.EXPONENTIAL)


def make_model(types, theta, alpha1=None, alpha2=None) -> ModelSpec:
    """Compact model builder for tests."""
    types = tuple(types)
    p = len(types)
    theta = np.asarray(theta, dtype=float)
    if alpha1 is None:
        alpha1 = np.zeros(p)
    if alpha2 is None:
        alpha2 = [-1.0 if ty is NodeType.GAUSSIAN else 0.0 for ty in types]
    params = tuple(NodeParams(float(a1), float(a2)) for a1, a2 in zip(alpha1, alpha2))
    return ModelSpec(types=types, params=params, edges=EdgeMatrix(theta))


def pair_model(t1: NodeType, t2: NodeType, theta12: float, alpha1=(0.0, 0.0), alpha2=None) -> ModelSpec:
    theta = np.array([[0.0, theta12], [theta12, 0.0]])
    return make_model((t1, t2), theta, alpha1, alpha2)


def random_dataset(rng: np.random.Generator, n: int, types) -> Dataset:
    """Support-respecting random data, bounded so exponential etas stay negative."""
    cols = []
    for ty in types:
        if ty is NodeType.GAUSSIAN:
            cols.append(rng.normal(0.0, 1.0, n))
        elif ty is NodeType.BERNOULLI:
            cols.append(rng.choice([-1.0, 1.0], n))
        elif ty is NodeType.POISSON:
            cols.append(rng.poisson(1.5, n).astype(float))
        else:
            cols.append(rng.exponential(1.0, n) + 1e-3)
    return Dataset(x=np.column_stack(cols), types=tuple(types))


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240811)
