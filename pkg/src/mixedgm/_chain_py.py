"""Pure-Python Gibbs sweep kernel (fallback when the compiled one is absent).

Draw-for-draw identical to the Cython kernel in ``_chain.pyx``: both consume
the same PCG64 bit stream through numpy's distribution functions and both
accumulate the natural parameter over the nonzero edge potentials of a row
in ascending index order, so a chain is bit-reproducible regardless of which
kernel runs it.
"""

from __future__ import annotations

import math

import numpy as np

from .core import DomainError

# exp(eta) above this cannot be drawn as an int64-valued Poisson count
POISSON_ETA_MAX = 43.0


def run_chain_kernel(theta, alpha1, alpha2, codes, x0, burn_in, thin, n_samples, bit_generator):
    """Run burn_in + n_samples*thin full sweeps, recording a row every thin sweeps.

    codes: 0=Gaussian, 1=Bernoulli, 2=Poisson, 3=exponential.  Returns an
    (n_samples, p) array.
    """
    rng = np.random.Generator(bit_generator)
    theta = np.asarray(theta, dtype=float)
    p = theta.shape[0]
    a1 = [float(v) for v in np.asarray(alpha1, dtype=float)]
    code = [int(c) for c in codes]
    x = [float(v) for v in np.asarray(x0, dtype=float)]
    out = np.empty((n_samples, p))

    codes_arr = np.asarray(codes)
    a2 = np.asarray(alpha2, dtype=float)
    mean_scale = np.where(codes_arr == 0, 1.0 / np.where(codes_arr == 0, -a2, 1.0), 0.0)
    sd = np.sqrt(np.where(codes_arr == 0, mean_scale, 0.0))
    mean_scale = mean_scale.tolist()
    sd = sd.tolist()

    nz_idx = [np.nonzero(theta[s])[0].tolist() for s in range(p)]
    nz_val = [theta[s][theta[s] != 0.0].tolist() for s in range(p)]

    normal = rng.normal
    random = rng.random
    poisson = rng.poisson
    exponential = rng.exponential
    tanh = math.tanh
    exp = math.exp

    def sweep():
        for s in range(p):
            eta = a1[s]
            idx = nz_idx[s]
            val = nz_val[s]
            for j in range(len(idx)):
                eta += val[j] * x[idx[j]]
            c = code[s]
            if c == 0:
                x[s] = normal(eta * mean_scale[s], sd[s])
            elif c == 1:
                x[s] = 1.0 if random() < 0.5 * (1.0 + tanh(eta)) else -1.0
            elif c == 2:
                if eta > POISSON_ETA_MAX:
                    raise DomainError(
                        f"Poisson conditional rate exp({eta:.3g}) overflows at node {s}; "
                        "the chain is diverging"
                    )
                x[s] = float(poisson(exp(eta)))
            else:
                if eta >= 0.0:
                    raise DomainError(
                        f"exponential node {s} reached eta={eta:.6g} >= 0 mid-chain"
                    )
                x[s] = exponential(-1.0 / eta)

    for _ in range(burn_in):
        sweep()
    for k in range(n_samples):
        for _ in range(thin):
            sweep()
        out[k] = x
    return out
