"""Transverse spatial entanglement of photon pairs in phase space.

Two-photon Gaussian states in dimensionless transverse variables, their
propagation through fractional-Fourier-transform lens systems, the DGCZ
separability test for rotated variables, and a slit-scan coincidence
simulator.
"""

from .criteria import (
    MINUS_PLUS,
    PLUS_MINUS,
    DgczReport,
    StateSummary,
    apply_arm_transforms,
    dgcz_sum_source,
    matching_idler_angle,
    position_correlation,
    rotated_dgcz,
    rotated_dgcz_closed_form,
    separability_angle,
    violation_possible,
    violation_threshold,
)
from .exceptions import (
    AdditivityError,
    AngleRangeError,
    ConfigurationError,
    DegenerateDensityError,
    FitError,
    InvalidGridError,
    InvalidParameterError,
    TransentError,
    UndefinedThresholdError,
)
from .gaussian import (
    ComplexGaussian1D,
    CovarianceMatrix4,
    GridSpec,
    SourceParameters,
    TwoPhotonAmplitude,
    frft_gaussian_1d,
    make_source_state,
    real_part_schmidt_number,
    schmidt_number,
    source_schmidt_number,
)
from .measurement import (
    CoincidenceHistogram,
    DetectorConfig,
    GaussianFit,
    ScanConfig,
    estimate_dgcz,
    expected_histogram,
    fit_gaussian,
    sample_pairs,
    scan_coincidences,
    simulate_scan,
)
from .optics import (
    ArmTransform,
    DimensionScale,
    LensSystem,
    OpticalElement,
    arm_transform,
    classify_rotation,
    compose_systems,
    frft_chain,
    frft_lens_system,
    perturb_positions,
    rotation_matrix,
    worst_case_pair,
)

__version__ = "0.1.0"
