#cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled Gibbs sweep kernel.

Mirrors ``_chain_py.run_chain_kernel`` exactly: same draw order, same
transforms, same bit stream, and the same sequential accumulation of the
natural parameter over each row's nonzero edge potentials, so outputs are
bit-identical to the fallback (the extension is built with -ffp-contract=off
to keep the arithmetic un-fused).
"""

from cpython.pycapsule cimport PyCapsule_GetPointer
from libc.math cimport exp, tanh
from libc.stdint cimport int64_t

import numpy as np

from numpy.random cimport bitgen_t
from numpy.random.c_distributions cimport (
    random_exponential,
    random_normal,
    random_poisson,
    random_standard_uniform,
)

from .core import DomainError

cdef double POISSON_ETA_MAX = 43.0


def run_chain_kernel(theta, alpha1, alpha2, codes, x0, burn_in, thin,
                     n_samples, bit_generator):
    theta = np.ascontiguousarray(theta, dtype=np.float64)
    cdef Py_ssize_t p = theta.shape[0]

    # Row-compressed nonzero structure of theta.
    nz_rows = [np.nonzero(theta[s])[0] for s in range(p)]
    indptr_np = np.zeros(p + 1, dtype=np.int64)
    indptr_np[1:] = np.cumsum([len(r) for r in nz_rows])
    indices_np = (
        np.concatenate(nz_rows).astype(np.int64) if indptr_np[p] else np.zeros(0, dtype=np.int64)
    )
    values_np = (
        np.concatenate([theta[s][r] for s, r in enumerate(nz_rows)])
        if indptr_np[p]
        else np.zeros(0, dtype=np.float64)
    )
    cdef const int64_t[::1] indptr = indptr_np
    cdef const int64_t[::1] indices = np.ascontiguousarray(indices_np)
    cdef const double[::1] values = np.ascontiguousarray(values_np)

    cdef const double[::1] a1 = np.ascontiguousarray(alpha1, dtype=np.float64)
    cdef const int64_t[::1] code = np.ascontiguousarray(codes, dtype=np.int64)

    codes_arr = np.asarray(codes)
    a2 = np.asarray(alpha2, dtype=np.float64)
    mean_scale_np = np.where(codes_arr == 0, 1.0 / np.where(codes_arr == 0, -a2, 1.0), 0.0)
    cdef const double[::1] mean_scale = mean_scale_np
    cdef const double[::1] sd = np.sqrt(np.where(codes_arr == 0, mean_scale_np, 0.0))

    cdef double[::1] x = np.asarray(x0, dtype=np.float64).copy()
    out_np = np.empty((n_samples, p), dtype=np.float64)
    cdef double[:, ::1] out = out_np

    cdef bitgen_t *rng = <bitgen_t *> PyCapsule_GetPointer(
        bit_generator.capsule, "BitGenerator")

    cdef Py_ssize_t nburn = burn_in
    cdef Py_ssize_t nthin = thin
    cdef Py_ssize_t nrows = n_samples
    cdef Py_ssize_t total = nburn + nrows * nthin
    cdef Py_ssize_t s, t, j, k, sweep_idx
    cdef double eta
    cdef Py_ssize_t bad_node = -1
    cdef double bad_eta = 0.0
    cdef int bad_kind = 0  # 1 = Poisson overflow, 2 = exponential eta >= 0

    with bit_generator.lock:
        for sweep_idx in range(total):
            for s in range(p):
                eta = a1[s]
                for j in range(indptr[s], indptr[s + 1]):
                    eta += values[j] * x[indices[j]]
                if code[s] == 0:
                    x[s] = random_normal(rng, eta * mean_scale[s], sd[s])
                elif code[s] == 1:
                    x[s] = 1.0 if random_standard_uniform(rng) < 0.5 * (1.0 + tanh(eta)) else -1.0
                elif code[s] == 2:
                    if eta > POISSON_ETA_MAX:
                        bad_node = s
                        bad_eta = eta
                        bad_kind = 1
                        break
                    x[s] = <double> random_poisson(rng, exp(eta))
                else:
                    if eta >= 0.0:
                        bad_node = s
                        bad_eta = eta
                        bad_kind = 2
                        break
                    x[s] = random_exponential(rng, -1.0 / eta)
            if bad_kind != 0:
                break
            k = sweep_idx - nburn + 1
            if k > 0 and k % nthin == 0:
                for t in range(p):
                    out[k // nthin - 1, t] = x[t]

    if bad_kind == 1:
        raise DomainError(
            f"Poisson conditional rate exp({bad_eta:.3g}) overflows at node {bad_node}; "
            "the chain is diverging"
        )
    if bad_kind == 2:
        raise DomainError(
            f"exponential node {bad_node} reached eta={bad_eta:.6g} >= 0 mid-chain"
        )
    return out_np
