"""Disordered XX-chain battery model: Hamiltonians, disorder, states, Lindblad generator.

The chain is open (N-1 bonds), every cell decays at the same rate gamma, and
disorder enters only through the per-cell Larmor frequencies omega_k sampled
uniformly on [omega0*(1-delta), omega0*(1+delta)].
"""

from dataclasses import dataclass, field

import numpy as np

from .operators import SIGMA_MINUS, SIGMA_PLUS, local_operator

_MASK64 = (1 << 64) - 1


class SimulationError(RuntimeError):
    """Numerical failure during a run (bad state, unstable step, ...)."""


@dataclass(frozen=True)
class ChainConfig:
    """Static model parameters, all rates in units of the decay rate gamma."""

    n_cells: int
    omega0: float = 1.0
    delta: float = 0.0
    coupling: float = 10.0
    gamma: float = 1.0
    fold_abs: bool = False

    def __post_init__(self):
        if self.n_cells < 1:
            raise ValueError("n_cells must be >= 1")
        if self.delta < 0:
            raise ValueError("delta must be >= 0")
        if self.gamma <= 0:
            raise ValueError("gamma must be > 0")
        if not np.isfinite(self.coupling):
            raise ValueError("coupling must be finite")


@dataclass(frozen=True)
class DisorderRealization:
    """One sampled vector of per-cell Larmor frequencies plus its seed."""

    omegas: np.ndarray
    seed: int


@dataclass(frozen=True)
class InitialStateKind:
    """Tagged initial-state choice: fullyexcited, coherent, or classical(alpha)."""

    tag: str
    alpha: float = 0.75

    _TAGS = ("fullyexcited", "coherent", "classical")

    def __post_init__(self):
        if self.tag not in self._TAGS:
            raise ValueError(f"unknown initial state tag {self.tag!r}")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError("classical alpha must lie in [0, 1]")

    @classmethod
    def fully_excited(cls):
        return cls("fullyexcited")

    @classmethod
    def coherent(cls):
        return cls("coherent")

    @classmethod
    def classical(cls, alpha=0.75):
        return cls("classical", alpha=alpha)


def splitmix64(x):
    """One round of the splitmix64 mixer; used to derive per-realization seeds."""
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def derive_seed(master_seed, index):
    """Per-realization seed from a master seed and realization index.

    Fixed 64-bit hash so the stream assignment is independent of worker
    count and scheduling.
    """
    return splitmix64(((master_seed & _MASK64) ^ splitmix64(index)) & _MASK64)


def sample_disorder(config: ChainConfig, seed):
    """Draw one disorder realization (RNG: numpy PCG64 seeded directly)."""
    n = config.n_cells
    if config.delta == 0.0:
        omegas = np.full(n, float(config.omega0))
    else:
        lo = config.omega0 * (1.0 - config.delta)
        hi = config.omega0 * (1.0 + config.delta)
        rng = np.random.Generator(np.random.PCG64(seed))
        omegas = rng.uniform(min(lo, hi), max(lo, hi), size=n)
    if config.fold_abs:
        omegas = np.abs(omegas)
    return DisorderRealization(omegas=omegas, seed=int(seed))


# --- basis bookkeeping -----------------------------------------------------
# Basis index i in [0, 2^N); site k (1-based, leftmost factor) is excited
# iff bit (N-k) of i is zero, matching |e> = index 0.

def excited_site_mask(n_cells, k):
    return 1 << (n_cells - k)


def excitation_counts(n_cells):
    """Number of excited cells for each basis index."""
    dim = 2 ** n_cells
    idx = np.arange(dim)
    pop = np.zeros(dim, dtype=np.int64)
    for k in range(1, n_cells + 1):
        pop += 1 - ((idx >> (n_cells - k)) & 1)
    return pop


def decay_index_arrays(n_cells):
    """(excited, ground) basis-index pairs for each cell's lowering operator.

    For cell k, sigma_k^- maps basis index excited[k-1][j] -> ground[k-1][j].
    """
    dim = 2 ** n_cells
    idx = np.arange(dim)
    eidx = np.empty((n_cells, dim // 2), dtype=np.int64)
    gidx = np.empty((n_cells, dim // 2), dtype=np.int64)
    for k in range(1, n_cells + 1):
        bit = excited_site_mask(n_cells, k)
        e = idx[(idx & bit) == 0]
        eidx[k - 1] = e
        gidx[k - 1] = e | bit
    return eidx, gidx


def free_field_diagonal(omegas):
    """Diagonal of H0 = sum_k (omega_k/2) sigma_k^z in the computational basis."""
    omegas = np.asarray(omegas, dtype=float)
    n = len(omegas)
    idx = np.arange(2 ** n)
    diag = np.zeros(2 ** n)
    for k in range(1, n + 1):
        sz = 1.0 - 2.0 * ((idx >> (n - k)) & 1)
        diag += 0.5 * omegas[k - 1] * sz
    return diag


def build_free_hamiltonian(realization: DisorderRealization):
    """H0 as a dense matrix, diagonal in the computational basis."""
    return np.diag(free_field_diagonal(realization.omegas)).astype(complex)


def build_interaction_hamiltonian(n_cells, coupling):
    """Nearest-neighbor flip-flop coupling (J/4)(XX + YY) on an open chain.

    Equals (J/2) sum_k (sigma_k^+ sigma_{k+1}^- + h.c.); conserves the total
    excitation number.
    """
    dim = 2 ** n_cells
    h = np.zeros((dim, dim), dtype=complex)
    for k in range(1, n_cells):
        sp = local_operator(k, SIGMA_PLUS, n_cells)
        sm = local_operator(k + 1, SIGMA_MINUS, n_cells)
        hop = sp @ sm
        h += 0.5 * coupling * (hop + hop.conj().T)
    return h


def initial_state(kind: InitialStateKind, n_cells):
    """Product density matrix of identical single-cell factors."""
    if kind.tag == "fullyexcited":
        cell = np.array([[1, 0], [0, 0]], dtype=complex)
    elif kind.tag == "coherent":
        cell = np.full((2, 2), 0.5, dtype=complex)
    else:
        a = kind.alpha
        cell = np.array([[a, 0], [0, 1 - a]], dtype=complex)
    rho = cell
    for _ in range(n_cells - 1):
        rho = np.kron(rho, cell)
    return rho


def dissipator(rho, gamma, n_cells):
    """Decay part of the master equation: gamma/2 sum_k (2 s- rho s+ - {s+s-, rho})."""
    nvec = excitation_counts(n_cells).astype(float)
    out = (-0.5 * gamma) * (nvec[:, None] + nvec[None, :]) * rho
    eidx, gidx = decay_index_arrays(n_cells)
    for k in range(n_cells):
        out[np.ix_(gidx[k], gidx[k])] += gamma * rho[np.ix_(eidx[k], eidx[k])]
    return out


def lindblad_rhs(rho, h_total, gamma, n_cells):
    """Right-hand side of the master equation: -i[H, rho] plus local decay."""
    rho = np.asarray(rho, dtype=complex)
    h_total = np.asarray(h_total, dtype=complex)
    if rho.shape != h_total.shape:
        raise ValueError(f"dimension mismatch: {rho.shape} vs {h_total.shape}")
    out = -1j * (h_total @ rho - rho @ h_total)
    out += dissipator(rho, gamma, n_cells)
    return out


def check_density_matrix(rho, where="", herm_tol=1e-10, trace_tol=1e-8, neg_tol=1e-8):
    """Raise SimulationError unless rho is Hermitian, unit trace, and PSD."""
    defect = np.max(np.abs(rho - rho.conj().T))
    if defect > herm_tol:
        raise SimulationError(f"state not Hermitian ({defect:.2e}) {where}")
    tr = np.trace(rho).real
    if abs(tr - 1.0) > trace_tol:
        raise SimulationError(f"state trace {tr:.10f} drifted from 1 {where}")
    wmin = np.linalg.eigvalsh(rho).min()
    if wmin < -neg_tol:
        raise SimulationError(f"state min eigenvalue {wmin:.2e} negative {where}")
