"""Hyperfine-resolved optical spectroscopy of group-IV color centers in
diamond: electro-nuclear Hamiltonians, PLE spectrum synthesis, strain and
field sweeps, and least-squares parameter extraction."""

from .analysis import (
    EnsembleStats,
    FitResult,
    chi2_independence,
    ensemble_stats,
    fit_full_model,
    fit_gaussian,
    fit_lorentzians,
    isotope_shift_ratio,
    kde,
)
from .hamiltonian import (
    DEFAULT_G_ELECTRON,
    MU_B_MHZ_PER_T,
    MU_N_MHZ_PER_T,
    EmitterModel,
    ManifoldParams,
    a_parallel,
    a_perp,
    a_ple,
    build_hamiltonian,
    jsq_operator,
    jt_shifted_params,
    registry_labels,
    registry_lookup,
)
from .kernels import BACKEND as KERNEL_BACKEND
from .spectrum import (
    LevelSweep,
    SpectrumTrace,
    TransitionTable,
    dipole_operator,
    merge_lines,
    sweep_field,
    sweep_strain,
    synth_spectrum,
    transition_diagram,
    transitions,
)
from .spinops import EigenSystem, SpinOperators, eigh, expectation, kron, spin_matrices

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "KERNEL_BACKEND",
    "SpinOperators",
    "EigenSystem",
    "spin_matrices",
    "kron",
    "eigh",
    "expectation",
    "ManifoldParams",
    "EmitterModel",
    "MU_B_MHZ_PER_T",
    "MU_N_MHZ_PER_T",
    "DEFAULT_G_ELECTRON",
    "build_hamiltonian",
    "a_parallel",
    "a_perp",
    "a_ple",
    "jsq_operator",
    "jt_shifted_params",
    "registry_labels",
    "registry_lookup",
    "TransitionTable",
    "SpectrumTrace",
    "LevelSweep",
    "dipole_operator",
    "transitions",
    "merge_lines",
    "synth_spectrum",
    "sweep_strain",
    "sweep_field",
    "transition_diagram",
    "FitResult",
    "EnsembleStats",
    "fit_lorentzians",
    "fit_gaussian",
    "fit_full_model",
    "kde",
    "isotope_shift_ratio",
    "chi2_independence",
    "ensemble_stats",
]
