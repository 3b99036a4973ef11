"""Numba kernel for fixed-step RK4 integration of the Lindblad generator.

The Hamiltonian is split into its (real) diagonal and an off-diagonal CSR
part so the commutator costs O(nnz * d) instead of a dense matmul; the decay
dissipator acts through precomputed excited/ground index tables. Used for
dimensions where a dense superoperator would be too large.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def _rhs(rho, a_elem, indptr, indices, data, eidx, gidx, gamma, out):
    d = rho.shape[0]
    # diagonal Hamiltonian commutator + anticommutator decay, fused elementwise
    for i in range(d):
        for j in range(d):
            out[i, j] = a_elem[i, j] * rho[i, j]
    # -1j * (Hoff @ rho): row-contiguous accumulation
    for i in range(d):
        for p in range(indptr[i], indptr[i + 1]):
            j = indices[p]
            v = -1j * data[p]
            for c in range(d):
                out[i, c] += v * rho[j, c]
    # +1j * (rho @ Hoff): gather per row; skipping zeros keeps diagonal
    # states cheap
    for r in range(d):
        for i in range(d):
            x = rho[r, i]
            if x != 0:
                for p in range(indptr[i], indptr[i + 1]):
                    out[r, indices[p]] += 1j * data[p] * x
    # jump gain terms: gamma * s_k^- rho s_k^+
    nk, m = eidx.shape
    for k in range(nk):
        for a in range(m):
            ga = gidx[k, a]
            ea = eidx[k, a]
            for b in range(m):
                out[ga, gidx[k, b]] += gamma * rho[ea, eidx[k, b]]


@njit(cache=True)
def run_interval(rho, n_steps, dt, a_elem, indptr, indices, data, eidx, gidx,
                 gamma, k1, k2, k3, k4, tmp):
    """Advance rho in place by n_steps classical RK4 steps of size dt."""
    d = rho.shape[0]
    for _ in range(n_steps):
        _rhs(rho, a_elem, indptr, indices, data, eidx, gidx, gamma, k1)
        for i in range(d):
            for j in range(d):
                tmp[i, j] = rho[i, j] + 0.5 * dt * k1[i, j]
        _rhs(tmp, a_elem, indptr, indices, data, eidx, gidx, gamma, k2)
        for i in range(d):
            for j in range(d):
                tmp[i, j] = rho[i, j] + 0.5 * dt * k2[i, j]
        _rhs(tmp, a_elem, indptr, indices, data, eidx, gidx, gamma, k3)
        for i in range(d):
            for j in range(d):
                tmp[i, j] = rho[i, j] + dt * k3[i, j]
        _rhs(tmp, a_elem, indptr, indices, data, eidx, gidx, gamma, k4)
        sixth = dt / 6.0
        for i in range(d):
            for j in range(d):
                rho[i, j] += sixth * (k1[i, j] + 2.0 * k2[i, j]
                                      + 2.0 * k3[i, j] + k4[i, j])
