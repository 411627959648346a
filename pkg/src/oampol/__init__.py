"""Biphoton OAM-to-polarization interface toolkit.

Simulates a cold-atom photon-pair source whose orbital-angular-momentum
entanglement is converted to polarization entanglement by fork holograms,
an etalon, and polarizing beam splitters; synthesizes and ingests
coincidence histograms; reconstructs two-qubit density matrices by linear
inversion and maximum-likelihood fitting; evaluates Bell-state fidelity
and the CHSH maximum with Monte Carlo error bars; and renders the SLM
phase masks for every measurement described here.
"""

from .coincidence import (
    BackgroundEstimate,
    CoincidenceHistogram,
    SourceModel,
    TomographyRecord,
    UncertaintyReport,
    build_record,
    estimate_background,
    histogram_from_csv,
    load_record,
    monte_carlo_uncertainty,
    net_windowed_counts,
    normalize_histogram,
    probabilities_from_record,
    save_record,
    simulate_histogram,
    simulate_record,
    subseed,
)
from .errors import (
    AllZeroCoefficients,
    DegenerateParameters,
    EmptySignal,
    EmptyState,
    NegativeEigenvalue,
    NonHermitianInput,
    NumericalError,
    RegionTooSmall,
    SingularSystem,
    ToolkitError,
    ValidationError,
    ZeroDenominator,
)
from .holograms import (
    BASIS_TO_PATTERN,
    GratingSpec,
    PhaseMask,
    blazed_grating,
    dual_order_pattern,
    export_mask,
    fourier_order_coefficients,
    mask_to_pixels,
    pattern_for_basis,
    read_pgm,
    rotate_180,
    spiral_phase,
    tomography_pattern,
    write_pgm,
    write_png,
)
from .oam import (
    InterfaceConfig,
    OAMBiphotonKet,
    PathLabeledKet,
    PolarizationKet,
    bell_fidelity_of_chain,
    chain_config_from_json_obj,
    etalon_filter,
    fork_diffract,
    map_to_polarization,
    run_chain,
    sfwm_state,
)
from .quantum import (
    BASIS_LABELS,
    BELL_LABELS,
    CHSH_QUANTUM_BOUND,
    TWO_QUBIT_LABELS,
    DensityMatrix,
    bell_state,
    chsh_max,
    correlation_matrix,
    depolarize,
    fidelity,
    hermitian_sqrt,
    is_physical,
    jacobi_eigh,
    joint_ket,
    joint_projector,
    projection_probability,
    single_photon_ket,
)
from .tomography import (
    CANONICAL_SETTINGS,
    COMPUTATIONAL_SETTINGS,
    MLEConfig,
    MLEResult,
    ProbabilitySet,
    SigmaSet,
    canonical_settings,
    linear_inversion,
    mle_cost,
    mle_initial_state,
    mle_reconstruct,
    parametrize,
    predicted_probabilities,
)

__version__ = "0.1.0"

__all__ = [
    "AllZeroCoefficients",
    "BackgroundEstimate",
    "BASIS_LABELS",
    "BASIS_TO_PATTERN",
    "BELL_LABELS",
    "CANONICAL_SETTINGS",
    "CHSH_QUANTUM_BOUND",
    "COMPUTATIONAL_SETTINGS",
    "CoincidenceHistogram",
    "DegenerateParameters",
    "DensityMatrix",
    "EmptySignal",
    "EmptyState",
    "GratingSpec",
    "InterfaceConfig",
    "MLEConfig",
    "MLEResult",
    "NegativeEigenvalue",
    "NonHermitianInput",
    "NumericalError",
    "OAMBiphotonKet",
    "PathLabeledKet",
    "PhaseMask",
    "PolarizationKet",
    "ProbabilitySet",
    "RegionTooSmall",
    "SigmaSet",
    "SingularSystem",
    "SourceModel",
    "TomographyRecord",
    "ToolkitError",
    "TWO_QUBIT_LABELS",
    "UncertaintyReport",
    "ValidationError",
    "ZeroDenominator",
    "bell_fidelity_of_chain",
    "bell_state",
    "blazed_grating",
    "build_record",
    "canonical_settings",
    "chain_config_from_json_obj",
    "chsh_max",
    "correlation_matrix",
    "depolarize",
    "dual_order_pattern",
    "estimate_background",
    "etalon_filter",
    "export_mask",
    "fidelity",
    "fork_diffract",
    "fourier_order_coefficients",
    "hermitian_sqrt",
    "histogram_from_csv",
    "is_physical",
    "jacobi_eigh",
    "joint_ket",
    "joint_projector",
    "linear_inversion",
    "load_record",
    "map_to_polarization",
    "mask_to_pixels",
    "mle_cost",
    "mle_initial_state",
    "mle_reconstruct",
    "monte_carlo_uncertainty",
    "net_windowed_counts",
    "normalize_histogram",
    "parametrize",
    "pattern_for_basis",
    "predicted_probabilities",
    "probabilities_from_record",
    "projection_probability",
    "read_pgm",
    "rotate_180",
    "run_chain",
    "save_record",
    "sfwm_state",
    "simulate_histogram",
    "simulate_record",
    "single_photon_ket",
    "spiral_phase",
    "subseed",
    "tomography_pattern",
    "write_pgm",
    "write_png",
]
