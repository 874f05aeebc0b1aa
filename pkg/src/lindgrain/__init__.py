"""Coarse-grained Lindblad master equations for small composite systems.

Build a Markovian generator from a system Hamiltonian and reservoir
couplings, in exact finite-interval, full-secular or partial-secular
coarse-graining modes; solve for steady states, propagate, and compute
inter-reservoir heat currents.  Conventions: hbar = k_B = 1, column-
stacked vectorization.
"""

from .linalg import (
    NumericalFailureError,
    hermitian_eig,
    kron,
    matexp_apply,
    null_space,
    partial_trace,
    psd_min_eig,
)
from .bohr import BohrDecomposition, bohr_decompose, interaction_picture_check
from .bath import (
    BathSpec,
    Exact,
    FullSecular,
    GammaMatrix,
    PartialSecular,
    build_gamma_matrix,
    correlation_function,
    coupling_rate,
    estimate_tau_c,
    gamma_convergence_scan,
    gamma_exact,
    gamma_limit,
    occupation,
    spectral_density,
)
from .lindblad import (
    Superoperator,
    SystemModel,
    assemble_liouvillian,
    commutator_superoperator,
    dissipator_from_gamma,
    energy_shift,
    lindblad_canonical_check,
    unvec,
    vec,
)
from .dynamics import (
    HeatCurrentReport,
    JumpChannels,
    SteadyStateResult,
    evolve,
    gibbs_state,
    heat_current,
    jump_channels,
    model_jump_channels,
    post_jump_state,
    steady_state,
)

__version__ = "0.1.0"
