"""Python interface to the atom-cavity-mechanics simulator core."""

from ._core import (
    CoolingFit,
    DensityMatrix,
    HilbertSpace,
    ModelParams,
    PolaronLevel,
    ScalarObservables,
    SimulationError,
    SpectralDensity,
    SteadyState,
    Trajectory,
    TransitionRecord,
    WignerMap,
    effective_ladder_hamiltonian,
    eigensystem,
    evolve,
    fit_cooling,
    fock_state,
    g2_phonon,
    hamiltonian,
    joint_spectral_density,
    linear_grid,
    number_operator,
    partial_trace,
    polariton_number,
    polaron_energy,
    product_state,
    rotating_hamiltonian,
    scalar_observables,
    steady_state,
    thermal_state,
    wigner,
    wigner_default,
)

__all__ = [
    "CoolingFit",
    "DensityMatrix",
    "HilbertSpace",
    "ModelParams",
    "PolaronLevel",
    "ScalarObservables",
    "SimulationError",
    "SpectralDensity",
    "SteadyState",
    "Trajectory",
    "TransitionRecord",
    "WignerMap",
    "effective_ladder_hamiltonian",
    "eigensystem",
    "evolve",
    "fit_cooling",
    "fock_state",
    "g2_phonon",
    "hamiltonian",
    "joint_spectral_density",
    "linear_grid",
    "number_operator",
    "partial_trace",
    "polariton_number",
    "polaron_energy",
    "product_state",
    "rotating_hamiltonian",
    "scalar_observables",
    "steady_state",
    "thermal_state",
    "wigner",
    "wigner_default",
]
