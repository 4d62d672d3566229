"""Spectral laboratory for Stokes flow on the unit disk: divergence-free
Bessel eigenbasis, dyadic frequency decompositions, Besov-type norms,
semigroup estimate scans, and a small mild-solution solver.
"""

from .errors import (
    CheckFailure,
    ConfigError,
    NumericalError,
    ResolutionError,
    TruncationWarning,
)
from .specfun import (
    bessel_j,
    bessel_j_prime,
    bessel_zero,
    bessel_zeros_row,
    beta_function,
    gauss_legendre,
)
from .dyadic import DEFAULT_PARTITION, DyadicPartition, active_bands, apply_band, apply_window
from .basis import (
    Basis,
    GridVectorField,
    PolarGrid,
    SpectralField,
    analyze,
    apply_stokes,
    boundary_traces,
    build_basis,
    build_grid,
    curl_values,
    field_values_at,
    load_basis,
    save_basis,
    synthesize,
    zero_field,
)
from .norms import (
    BesovIndex,
    besov_norm,
    critical_index,
    dual_pairing,
    gradient_lp_norm,
    lp_norm,
    tail_smallness,
    trajectory_norm,
)
from .semigroup import (
    EstimateScan,
    gradient_vs_besov,
    heat_apply,
    kernel_matrix,
    kernel_tail_threshold,
    scan_besov_bounded,
    scan_gradient,
    scan_smoothing,
    weak_star_continuity,
)
from .nonlinear import (
    NonlinearWorkspace,
    build_workspace,
    dealiasing_check,
    energy_identity_residual,
    helmholtz_project,
    nonlinear_coeffs,
)
from .solver import (
    PicardReport,
    SolverConfig,
    Trajectory,
    duhamel_apply,
    etd_timestep,
    evaluate_at,
    linear_trajectory,
    picard_solve,
    residual,
)
from .harness import (
    DataSpec,
    RunConfig,
    embedding_experiment,
    generate_data,
    load_config,
    run_experiment,
    smallness_bisection,
    verify_checks,
)

__version__ = "0.1.0"

__all__ = [
    "Basis",
    "BesovIndex",
    "CheckFailure",
    "ConfigError",
    "DEFAULT_PARTITION",
    "DataSpec",
    "DyadicPartition",
    "EstimateScan",
    "GridVectorField",
    "NonlinearWorkspace",
    "NumericalError",
    "PicardReport",
    "PolarGrid",
    "ResolutionError",
    "RunConfig",
    "SolverConfig",
    "SpectralField",
    "Trajectory",
    "TruncationWarning",
    "active_bands",
    "analyze",
    "apply_band",
    "apply_stokes",
    "apply_window",
    "bessel_j",
    "bessel_j_prime",
    "bessel_zero",
    "bessel_zeros_row",
    "besov_norm",
    "beta_function",
    "boundary_traces",
    "build_basis",
    "build_grid",
    "build_workspace",
    "critical_index",
    "curl_values",
    "dealiasing_check",
    "dual_pairing",
    "duhamel_apply",
    "embedding_experiment",
    "energy_identity_residual",
    "etd_timestep",
    "evaluate_at",
    "field_values_at",
    "gauss_legendre",
    "generate_data",
    "gradient_lp_norm",
    "gradient_vs_besov",
    "heat_apply",
    "helmholtz_project",
    "kernel_matrix",
    "kernel_tail_threshold",
    "linear_trajectory",
    "load_basis",
    "load_config",
    "lp_norm",
    "nonlinear_coeffs",
    "picard_solve",
    "residual",
    "run_experiment",
    "save_basis",
    "scan_besov_bounded",
    "scan_gradient",
    "scan_smoothing",
    "smallness_bisection",
    "synthesize",
    "tail_smallness",
    "trajectory_norm",
    "verify_checks",
    "weak_star_continuity",
    "zero_field",
]
