"""Steady-state entanglement of two driven, coupled qubits.

A small numpy library that integrates the Lindblad master equation of a
strongly driven qubit pair, extracts the periodic steady state through
the one-period propagator, and cross-validates the result against two
perturbative closed forms: a non-resonant harmonic series and a
rotating-wave steady state valid near the two-qubit resonance.
"""

from .concurrence import AveragingConfig, averaged_concurrence_numeric, concurrence
from .dynamics import (
    IntegratorConfig,
    Trajectory,
    evolve,
    monodromy,
    rhs,
    steady_state,
)
from .model import (
    KB_DEFAULT,
    DriveParams,
    QubitParams,
    SystemParams,
    check_density_matrix,
    dissipator,
    energy_gap,
    hamiltonian,
    thermal_excitation_rate,
)
from .rwa import (
    RwaElements,
    RwaSteadyState,
    concurrence_resonant,
    dip_width,
    reconstruct_original_frame,
    rwa_elements,
    select_K12,
    steady_state_rwa,
    validate_xi_integrals,
)
from .series import (
    FloquetModeCoeffs,
    ResonanceInfo,
    SeriesConfig,
    averaged_concurrence_nonres,
    chi_qk,
    classify_resonances,
    coeff_Ck,
    concurrence_time_nonres,
    floquet_mode_u1,
    lambda_qk,
    quasienergies_zeroth,
)

__version__ = "0.1.0"
