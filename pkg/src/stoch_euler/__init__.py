"""Pseudo-spectral 2D stochastic incompressible Navier-Stokes toolkit."""

from .spectral import (
    ConfigurationError,
    Grid,
    PhysicalField,
    SpectralField,
    SpectralScalar,
    curl2d,
    divergence_sup,
    fourier_truncate,
    grad_l2_norm_sq,
    l2_norm_sq,
    leray_project,
    nonlinear_term,
    to_physical,
    to_spectral,
)
from .forcing import ForcingBasis, NoiseIncrement, eval_basis, rho_bar, sample_increment, sigma_bar
from .initial_conditions import (
    FbbParams,
    VortexSheetParams,
    flat_vortex_sheet,
    fractional_brownian_bridge,
    perturbation_sigma_delta,
    taylor_green,
)
from .integrator import DiagnosticsRecord, IntegratorConfig, Trajectory, UnstableRunError, auto_dt, run, step
from .diagnostics import (
    ModulusFit,
    RadiusUnresolvedError,
    StructureFunctionTable,
    disk_average_identity_check,
    dissipation_integral,
    energy_balance_residual,
    fit_modulus,
    poincare_inequality_check,
    sobolev_seminorm,
    sobolev_seminorm_spectral,
    structure_function,
    structure_function_table,
    structure_function_time_integrated,
)
from .ensemble import EnsembleSpec, EnsembleStats, aggregate, analyze, run_ensemble

__version__ = "0.1.0"
