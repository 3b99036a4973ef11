"""Self-discharging dynamics of disordered XX spin-chain quantum batteries."""

__version__ = "0.1.0"

from .dynamics import TimeGrid, Trajectory, convergence_check, evolve
from .ensemble import (EnsembleResult, EnsembleSpec, HalfLifeFit, eta,
                       fit_half_life_curve, half_life, run_ensemble)
from .ergotropy import (ErgotropyBreakdown, breakdown, ergotropy,
                        ergotropy_rate_terms, ergotropy_via_passive,
                        internal_energy, passive_state)
from .model import (ChainConfig, DisorderRealization, InitialStateKind,
                    SimulationError, build_free_hamiltonian,
                    build_interaction_hamiltonian, initial_state,
                    lindblad_rhs, sample_disorder)
from .operators import (EigenSystem, commutator, hermitian_eigensystem, kron,
                        local_operator)
