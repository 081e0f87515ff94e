"""Gibbs sampling from a (strongly compatible) mixed graphical model.

A chain cycles through the nodes in ascending index order, resampling each
from its conditional given the current state of the rest; one pass over all
p nodes is a sweep.  After ``burn_in`` sweeps, a row is recorded every
``thin`` sweeps until ``n_samples`` rows exist.

Two sweep kernels are available: a compiled Cython one and a pure-Python
fallback, selected at import (compiled preferred; set MGM_PURE_PYTHON=1 to
force the fallback).  Both drive the same PCG64 bit stream, so results are
bit-identical per seed either way.
"""

from __future__ import annotations

import math
import os
import warnings
from dataclasses import dataclass

import numpy as np

from .compat import Verdict, check_compatibility
from .core import Dataset, DomainError, ModelSpec, NodeType

if os.environ.get("MGM_PURE_PYTHON"):
    from . import _chain_py as _kernel_module

    KERNEL = "python"
else:
    try:
        from . import _chain as _kernel_module

        KERNEL = "compiled"
    except ImportError:
        from . import _chain_py as _kernel_module

        KERNEL = "python"

TYPE_CODES = {
    NodeType.GAUSSIAN: 0,
    NodeType.BERNOULLI: 1,
    NodeType.POISSON: 2,
    NodeType.EXPONENTIAL: 3,
}

# Initial state when none is provided.
SUPPORT_DEFAULT = {
    NodeType.GAUSSIAN: 0.0,
    NodeType.BERNOULLI: 1.0,
    NodeType.POISSON: 0.0,
    NodeType.EXPONENTIAL: 1.0,
}


@dataclass(frozen=True)
class GibbsConfig:
    n_samples: int
    seed: int
    burn_in: int = 3000
    thin: int = 500
    init: np.ndarray | None = None

    def __post_init__(self):
        if self.burn_in < 0:
            raise ValueError("burn_in must be >= 0")
        if self.thin < 1:
            raise ValueError("thin must be >= 1")
        if self.n_samples < 1:
            raise ValueError("n_samples must be >= 1")


def sample_conditional(node_type: NodeType, eta: float, alpha2: float, rng: np.random.Generator) -> float:
    """One draw from a node-conditional distribution.

    Gaussian: mean eta/(-alpha2), variance 1/(-alpha2).  Bernoulli:
    P(x=+1) = e^eta / (e^eta + e^-eta).  Poisson: rate e^eta.
    Exponential: rate -eta (requires eta < 0).
    """
    if node_type is NodeType.GAUSSIAN:
        if alpha2 >= 0:
            raise DomainError("Gaussian conditional requires alpha2 < 0")
        return float(rng.normal(eta / -alpha2, math.sqrt(1.0 / -alpha2)))
    if node_type is NodeType.BERNOULLI:
        return 1.0 if rng.random() < 0.5 * (1.0 + math.tanh(eta)) else -1.0
    if node_type is NodeType.POISSON:
        return float(rng.poisson(math.exp(eta)))
    if eta >= 0:
        raise DomainError("exponential conditional requires eta < 0")
    return float(rng.exponential(-1.0 / eta))


def default_initial_state(model: ModelSpec) -> np.ndarray:
    return np.array([SUPPORT_DEFAULT[ty] for ty in model.types])


def run_chain(model: ModelSpec, config: GibbsConfig, require_strong_compat: bool = True) -> Dataset:
    """Draw ``config.n_samples`` approximately independent rows from the model.

    The model must be strongly compatible; pass require_strong_compat=False
    to downgrade that precondition to a warning (the in-chain domain guards
    still apply, so a diverging chain fails loudly rather than silently).
    """
    report = check_compatibility(model)
    if report.verdict is not Verdict.STRONGLY_COMPATIBLE:
        msg = f"model is not strongly compatible (verdict: {report.verdict.value})"
        if require_strong_compat:
            raise DomainError(msg + "; pass require_strong_compat=False to sample anyway")
        warnings.warn(msg, RuntimeWarning, stacklevel=2)
    for s, ty in enumerate(model.types):
        if ty is NodeType.GAUSSIAN and model.params[s].alpha2 >= 0:
            raise DomainError(f"Gaussian node {s} has alpha2 >= 0; its conditional is not samplable")

    if config.init is not None:
        x0 = np.asarray(config.init, dtype=float)
        if x0.shape != (model.p,):
            raise ValueError(f"init must have length p={model.p}")
    else:
        x0 = default_initial_state(model)

    codes = np.array([TYPE_CODES[ty] for ty in model.types], dtype=np.int64)
    bit_generator = np.random.PCG64(config.seed)
    x = _kernel_module.run_chain_kernel(
        np.ascontiguousarray(model.theta),
        model.alpha1,
        model.alpha2,
        codes,
        x0,
        config.burn_in,
        config.thin,
        config.n_samples,
        bit_generator,
    )
    return Dataset(x=x, types=model.types)
