"""Fixed-step RK4 time integration of the master equation over a uniform grid.

Two equivalent engines realize the same classical RK4 map:

* small systems (dim <= 16): the generator is linear and time independent, so
  one RK4 step is exactly the degree-4 Taylor polynomial of the superoperator;
  the per-sample step matrix is precomputed and applied as a matvec.
* larger systems: a numba kernel evaluates the right-hand side directly.

No trace renormalization is performed; drift and negativity are monitored at
every grid sample and abort the run when they exceed 1e-6.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.sparse

from . import _kernels
from .ergotropy import passive_energy_from_spectra, _rk4_single_step
from .model import (SimulationError, decay_index_arrays, excitation_counts,
                    local_operator)
from .operators import SIGMA_MINUS, commutator

DEFAULT_DT = 1e-3
DEFAULT_T_END = 10.0
DEFAULT_N_SAMPLES = 1001

_DENSE_SUPEROP_MAX_DIM = 16
_CHUNK = 64
_TRACE_ABORT = 1e-6
_NEGATIVITY_ABORT = 1e-6


@dataclass(frozen=True)
class TimeGrid:
    """Uniform output grid on [0, t_end] including both endpoints."""

    t_end: float = DEFAULT_T_END
    n_samples: int = DEFAULT_N_SAMPLES

    def __post_init__(self):
        if self.t_end <= 0:
            raise ValueError("t_end must be > 0")
        if self.n_samples < 2:
            raise ValueError("n_samples must be >= 2")

    def times(self):
        return np.linspace(0.0, self.t_end, self.n_samples)

    @property
    def spacing(self):
        return self.t_end / (self.n_samples - 1)


@dataclass
class Trajectory:
    grid: TimeGrid
    times: np.ndarray
    ergotropy: np.ndarray
    internal_energy: np.ndarray
    passive_energy: np.ndarray
    coherent_rate_term: np.ndarray
    dissipative_rate_term: np.ndarray
    u0_rate: Optional[np.ndarray]
    final_state: np.ndarray


@dataclass(frozen=True)
class ConvergenceReport:
    dt: float
    max_discrepancy: float
    threshold: float
    passed: bool
    aborted: bool
    detail: str = ""


def _superop(h_total, gamma, n_cells):
    """Dense superoperator of the generator, row-major vec convention."""
    d = h_total.shape[0]
    eye = np.eye(d, dtype=complex)
    lop = -1j * (np.kron(h_total, eye) - np.kron(eye, h_total.T))
    number_op = np.diag(excitation_counts(n_cells).astype(float)).astype(complex)
    lop -= 0.5 * gamma * (np.kron(number_op, eye) + np.kron(eye, number_op))
    for k in range(1, n_cells + 1):
        s = local_operator(k, SIGMA_MINUS, n_cells)
        lop += gamma * np.kron(s, s)
    return lop


def _rk4_step_matrix(lop, dt):
    """Exact RK4 update matrix for a linear autonomous system."""
    eye = np.eye(lop.shape[0], dtype=complex)
    m = eye + (dt / 4.0) * lop
    m = eye + (dt / 3.0) * (lop @ m)
    m = eye + (dt / 2.0) * (lop @ m)
    return eye + dt * (lop @ m)


class _KernelEngine:
    def __init__(self, h_total, gamma, n_cells, dt):
        d = h_total.shape[0]
        hdiag = np.real(np.diag(h_total))
        hoff = scipy.sparse.csr_matrix(h_total - np.diag(np.diag(h_total)))
        nvec = excitation_counts(n_cells).astype(float)
        self.a_elem = (-1j * (hdiag[:, None] - hdiag[None, :])
                       - 0.5 * gamma * (nvec[:, None] + nvec[None, :]))
        self.a_elem = np.ascontiguousarray(self.a_elem, dtype=complex)
        self.indptr = hoff.indptr
        self.indices = hoff.indices
        self.data = hoff.data.astype(complex)
        self.eidx, self.gidx = decay_index_arrays(n_cells)
        self.gamma = float(gamma)
        self.dt = dt
        self.bufs = [np.empty((d, d), dtype=complex) for _ in range(5)]

    def advance(self, state, n_steps):
        _kernels.run_interval(state, n_steps, self.dt, self.a_elem,
                              self.indptr, self.indices, self.data,
                              self.eidx, self.gidx, self.gamma, *self.bufs)
        return state


class _MatrixEngine:
    def __init__(self, h_total, gamma, n_cells, dt, n_sub):
        lop = _superop(h_total, gamma, n_cells)
        step = _rk4_step_matrix(lop, dt)
        self.m_interval = np.linalg.matrix_power(step, n_sub)
        self.n_sub = n_sub

    def advance(self, state, n_steps):
        assert n_steps == self.n_sub
        d = state.shape[0]
        state[:] = (self.m_interval @ state.reshape(-1)).reshape(d, d)
        return state


def _batched_dissipator(batch, gamma, n_cells, eidx, gidx, nvec):
    out = (-0.5 * gamma) * (nvec[None, :, None] + nvec[None, None, :]) * batch
    for k in range(n_cells):
        out[:, gidx[k][:, None], gidx[k][None, :]] += \
            gamma * batch[:, eidx[k][:, None], eidx[k][None, :]]
    return out


def evolve(rho0, h_total, h0, h_int, gamma, grid: TimeGrid, dt=DEFAULT_DT,
           record_passive_rate=False, micro_step=1e-5):
    """Integrate the master equation and record observables on the grid.

    dt is rounded to the nearest integer divisor of the sample spacing.
    The passive-energy rate series is only computed on request (it needs two
    micro-evolutions plus an eigensolve per sample).
    """
    d = rho0.shape[0]
    n_cells = int(round(np.log2(d)))
    if 2 ** n_cells != d:
        raise ValueError("state dimension must be a power of 2")
    times = grid.times()
    spacing = grid.spacing
    if dt > spacing * (1 + 1e-12):
        raise ValueError("dt must not exceed the grid spacing")
    n_sub = max(1, int(round(spacing / dt)))
    dt_eff = spacing / n_sub

    c_h0_int = commutator(h0, h_int)
    eps_h0 = np.linalg.eigvalsh(h0)
    eidx, gidx = decay_index_arrays(n_cells)
    nvec = excitation_counts(n_cells).astype(float)
    h_total = np.asarray(h_total, dtype=complex)

    if d <= _DENSE_SUPEROP_MAX_DIM:
        engine = _MatrixEngine(h_total, gamma, n_cells, dt_eff, n_sub)
    else:
        engine = _KernelEngine(h_total, gamma, n_cells, dt_eff)

    n_s = grid.n_samples
    erg = np.empty(n_s)
    u_series = np.empty(n_s)
    u0_series = np.empty(n_s)
    coh_series = np.empty(n_s)
    dis_series = np.empty(n_s)
    u0r_series = np.empty(n_s) if record_passive_rate else None

    state = np.array(rho0, dtype=complex, copy=True)
    buf = np.empty((min(_CHUNK, n_s), d, d), dtype=complex)
    start = 0
    fill = 0
    for idx in range(n_s):
        buf[fill] = state
        fill += 1
        if fill == buf.shape[0] or idx == n_s - 1:
            _process_chunk(buf[:fill], start, times, h0, c_h0_int, eps_h0,
                           gamma, n_cells, eidx, gidx, nvec,
                           erg, u_series, u0_series, coh_series, dis_series,
                           u0r_series, h_total, micro_step, dt_eff)
            start += fill
            fill = 0
        if idx < n_s - 1:
            engine.advance(state, n_sub)

    return Trajectory(grid=grid, times=times, ergotropy=erg,
                      internal_energy=u_series, passive_energy=u0_series,
                      coherent_rate_term=coh_series,
                      dissipative_rate_term=dis_series,
                      u0_rate=u0r_series, final_state=state)


def _process_chunk(batch, start, times, h0, c_h0_int, eps_h0, gamma, n_cells,
                   eidx, gidx, nvec, erg, u_series, u0_series, coh_series,
                   dis_series, u0r_series, h_total, micro_step, dt_eff):
    m = batch.shape[0]
    sl = slice(start, start + m)
    if not np.all(np.isfinite(batch)):
        raise SimulationError(
            f"state diverged near t={times[start]:.4f} (step too large)")
    herm = np.max(np.abs(batch - batch.conj().swapaxes(1, 2)))
    if herm > 1e-8:
        raise SimulationError(
            f"hermiticity drift {herm:.2e} near t={times[start]:.4f}")
    tr = np.einsum('tii->t', batch).real
    drift = np.max(np.abs(tr - 1.0))
    if drift > _TRACE_ABORT:
        raise SimulationError(
            f"trace drift {drift:.2e} near t={times[start]:.4f} "
            "(step too large)")
    p = np.linalg.eigvalsh(batch)
    if p.min() < -_NEGATIVITY_ABORT:
        raise SimulationError(
            f"negativity {p.min():.2e} near t={times[start]:.4f} "
            "(step too large)")
    u_series[sl] = np.einsum('tij,ji->t', batch, h0).real
    u0_series[sl] = p[:, ::-1] @ eps_h0
    erg[sl] = u_series[sl] - u0_series[sl]
    coh_series[sl] = np.einsum('tij,ji->t', batch, c_h0_int).imag
    dis = _batched_dissipator(batch, gamma, n_cells, eidx, gidx, nvec)
    dis_series[sl] = np.einsum('tij,ji->t', dis, h0).real
    if u0r_series is not None:
        for t in range(m):
            up = np.empty(2)
            for i, h in enumerate((micro_step, -micro_step)):
                r = _rk4_single_step(batch[t], h_total, gamma, n_cells, h)
                up[i] = passive_energy_from_spectra(np.linalg.eigvalsh(r), eps_h0)
            u0r_series[start + t] = (up[0] - up[1]) / (2.0 * micro_step)


def convergence_check(rho0, h_total, h0, h_int, gamma, grid: TimeGrid,
                      dt=DEFAULT_DT):
    """Step-halving self-consistency of the ergotropy trajectory."""
    try:
        full = evolve(rho0, h_total, h0, h_int, gamma, grid, dt)
        half = evolve(rho0, h_total, h0, h_int, gamma, grid, dt / 2.0)
    except SimulationError as exc:
        return ConvergenceReport(dt=dt, max_discrepancy=np.inf, threshold=0.0,
                                 passed=False, aborted=True, detail=str(exc))
    disc = float(np.max(np.abs(full.ergotropy - half.ergotropy)))
    scale = float(np.max(np.abs(full.ergotropy)))
    threshold = 1e-6 * scale
    return ConvergenceReport(dt=dt, max_discrepancy=disc, threshold=threshold,
                             passed=disc <= max(threshold, 1e-300),
                             aborted=False)
