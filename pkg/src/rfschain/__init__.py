"""Reduced fidelity susceptibility diagnostics for dimerized spin chains.

Exact-diagonalization library for three periodic families (spin-1/2
dimerized chain, mixed-spin ferrimagnet, spin-1 bilinear-biquadratic
ring) with several independent routes to the two-site reduced fidelity
susceptibility, closed-form reference curves, and a sweep engine with
CSV/JSON reporting. See the `rfschain` CLI for the command-line entry
points.
"""

from .analytic import (
    E00_UNIFORM,
    EtaAlpha,
    ThermoParams,
    alpha_from_eta,
    eta_from_alpha,
    n4_energy,
    n4_rfs,
    thermo_derivatives,
    thermo_energy,
    thermo_rfs,
)
from .eig import (
    GroundStateResult,
    SpectrumResult,
    curvature_perturbative,
    dense_ground,
    dense_spectrum,
    energy_derivatives_fd,
    lanczos_ground,
    solve_ground,
    spec_at,
)
from .errors import (
    BasisMismatch,
    DegenerateGroundState,
    DimensionCap,
    DimensionMismatch,
    DimensionTooSmall,
    DomainViolation,
    EmptySector,
    IndexOutOfRange,
    NegativeEigenvalue,
    NoConvergence,
    NoInteriorPeak,
    NonPositiveFidelity,
    NotPSD,
    SectorChange,
    SpecMismatch,
    SpinChainError,
    StepTooSmall,
    UnsupportedSpin,
)
from .fidelity import (
    SusceptibilityRecord,
    global_susceptibility,
    pure_fidelity,
    rfs_commuting_spectra,
    rfs_correlator,
    rfs_energy_dimer,
    rfs_energy_mixed,
    rfs_mixed,
    susceptibility_fd,
    uhlmann_fidelity,
)
from .hilbert import (
    SectorBasis,
    SiteSpec,
    apply_biquadratic_bond,
    apply_heisenberg_bond,
    enumerate_sector,
)
from .models import (
    ALPHA_MIN,
    BB,
    DIMER,
    FAMILIES,
    MIXED,
    ModelSpec,
    combine_parts,
    driving_operator,
    ground_sector,
    hamiltonian,
    hamiltonian_parts,
    sector_basis,
)
from .observables import (
    ALIGNED_BLOCK_ORDER,
    TwoSiteDensityMatrix,
    assert_density_matrix,
    correlator_zz,
    correlators_from_energy,
    mixed_pair_rdm,
    multiplet_projectors,
    multiplet_weights,
    pair_exchange_matrix,
    scalar_correlator,
    singlet_pair_spectrum,
    su2_structure_check,
    two_site_rdm,
)
from .sweep import (
    GLOBAL_ROUTE,
    ROUTE_ORDER,
    PeakEstimate,
    ScalingRow,
    SweepRecord,
    find_pseudo_critical,
    record_value,
    routes_for_family,
    run_sweep,
    scaling_table,
    sweep_meta,
    write_csv,
    write_json,
)
from .version import VERSION

__version__ = VERSION

__all__ = [
    "ALIGNED_BLOCK_ORDER",
    "ALPHA_MIN", "BB", "BasisMismatch", "DIMER", "DegenerateGroundState",
    "DimensionCap", "DimensionMismatch", "DimensionTooSmall",
    "DomainViolation", "E00_UNIFORM", "EmptySector", "EtaAlpha", "FAMILIES",
    "GLOBAL_ROUTE", "GroundStateResult", "IndexOutOfRange", "MIXED",
    "ModelSpec", "NegativeEigenvalue", "NoConvergence", "NoInteriorPeak",
    "NonPositiveFidelity", "NotPSD", "PeakEstimate", "ROUTE_ORDER",
    "ScalingRow", "SectorBasis", "SectorChange", "SiteSpec", "SpecMismatch",
    "SpectrumResult", "SpinChainError", "StepTooSmall",
    "SusceptibilityRecord", "SweepRecord", "ThermoParams",
    "TwoSiteDensityMatrix",
    "UnsupportedSpin", "VERSION", "alpha_from_eta", "apply_biquadratic_bond",
    "apply_heisenberg_bond", "assert_density_matrix", "combine_parts",
    "correlator_zz", "correlators_from_energy", "curvature_perturbative",
    "dense_ground", "dense_spectrum", "driving_operator",
    "energy_derivatives_fd", "enumerate_sector", "eta_from_alpha",
    "find_pseudo_critical", "global_susceptibility", "ground_sector",
    "hamiltonian", "hamiltonian_parts", "lanczos_ground", "mixed_pair_rdm",
    "multiplet_projectors", "multiplet_weights", "n4_energy", "n4_rfs",
    "pair_exchange_matrix", "pure_fidelity", "record_value",
    "rfs_commuting_spectra", "rfs_correlator", "rfs_energy_dimer",
    "rfs_energy_mixed", "rfs_mixed", "routes_for_family", "run_sweep",
    "scalar_correlator", "scaling_table", "sector_basis",
    "singlet_pair_spectrum", "solve_ground", "spec_at",
    "su2_structure_check", "susceptibility_fd", "sweep_meta",
    "thermo_derivatives", "thermo_energy", "thermo_rfs", "two_site_rdm",
    "uhlmann_fidelity", "write_csv", "write_json",
]
