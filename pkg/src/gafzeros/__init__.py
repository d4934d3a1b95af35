"""Gaussian analytic functions with stationary Gaussian coefficients: kernels,
samplers, zero sets and correlation functions of the zeros."""

from .errors import (
    DegenerateKernelError,
    DomainError,
    GafError,
    IllConditionedError,
    InvalidArgumentError,
    NotPSDError,
    NumericFailure,
    SizeLimitError,
)
from .spectral import (
    ArcUniform,
    Atoms,
    CovarianceEvaluator,
    Lebesgue,
    QuadratureRule,
    TabulatedDensity,
    build_rule,
    measure_from_json,
    measure_to_json,
    poisson,
    szego,
)
from .gauss import (
    ComplexNormalSource,
    GafPolynomial,
    IIDSampler,
    PeriodicSampler,
    ToeplitzSqrtSampler,
    empirical_covariance,
    hermitian_eig,
    psd_sqrt,
    sample_coefficients,
)
from .zeros import classify, expected_count_in_disk, find_roots, mc_count_histogram
from .corr import (
    CorrelationResult,
    PointConfig,
    conditional_kernel,
    cue_kernel,
    mu_mass,
    permanent,
    rho1_ek,
    rho1_spectral,
    rho_n_direct,
    rho_n_spectral,
    verify_borchardt,
    verify_cauchy,
    verify_reproducing,
    verify_volume_formula,
)

__version__ = "0.1.0"
