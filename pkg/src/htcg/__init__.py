"""High-temperature circle gas toolkit.

Numerics for N-particle log-gases on the torus at temperature scaling 2*beta/N:
equilibrium measures by free-energy descent, the fluctuation operator and its
spectrum, central-limit variances, Gibbs samplers, and Wasserstein transport
bounds.
"""

__version__ = "0.1.0"

from .torus import (
    GridFn,
    TrigSeries,
    h_half_norm_sq,
    hilbert_transform,
    log_potential,
    pairing,
    weighted_l2_norm_sq,
)
from .equilibrium import (
    ConvergenceError,
    Density,
    EquilibriumResult,
    PotentialSpec,
    energy_gap,
    free_energy,
    limit_diagnostics,
    solve_equilibrium,
)
from .spectral import (
    EigenSystem,
    OperatorModel,
    WeylFit,
    apply_A,
    apply_L,
    apply_W,
    apply_Xi,
    assemble,
    eigensystem,
    h_inner,
    weyl_fit,
)
from .fluctuations import (
    InterpolationTable,
    VarianceReport,
    closed_form_v0,
    interpolation_check,
    variance_eigen,
    variance_report,
    variance_solve,
)
from .gibbs import (
    ChainSpec,
    Configuration,
    SampleResult,
    StatSeries,
    ad_normality_pvalue,
    drift,
    generator_identity_gap,
    linear_statistics,
    log_density_unnorm,
    nu_N,
    sample,
    sample_batch,
    w2_to_gaussian,
    zeta_N,
)
from .transport import (
    W1Result,
    concentration_bound,
    concentration_constant,
    w1_circle,
)

__all__ = [
    "GridFn",
    "TrigSeries",
    "hilbert_transform",
    "log_potential",
    "h_half_norm_sq",
    "weighted_l2_norm_sq",
    "pairing",
    "PotentialSpec",
    "Density",
    "EquilibriumResult",
    "ConvergenceError",
    "solve_equilibrium",
    "free_energy",
    "energy_gap",
    "limit_diagnostics",
    "OperatorModel",
    "EigenSystem",
    "WeylFit",
    "apply_L",
    "apply_A",
    "apply_W",
    "apply_Xi",
    "h_inner",
    "assemble",
    "eigensystem",
    "weyl_fit",
    "VarianceReport",
    "InterpolationTable",
    "variance_eigen",
    "variance_solve",
    "variance_report",
    "closed_form_v0",
    "interpolation_check",
    "Configuration",
    "ChainSpec",
    "StatSeries",
    "SampleResult",
    "log_density_unnorm",
    "drift",
    "sample",
    "sample_batch",
    "nu_N",
    "zeta_N",
    "generator_identity_gap",
    "linear_statistics",
    "ad_normality_pvalue",
    "w2_to_gaussian",
    "W1Result",
    "w1_circle",
    "concentration_constant",
    "concentration_bound",
    "__version__",
]
