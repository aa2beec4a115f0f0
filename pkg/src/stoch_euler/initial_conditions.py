"""Random and analytic initial velocity fields, Leray-projected before use.

All constructors are deterministic given (grid, params, rng state): draws are
consumed in a fixed documented order, so the same seed reproduces the same
field bitwise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .spectral import (
    ConfigurationError,
    Grid,
    PhysicalField,
    SpectralField,
    full_from_half,
    leray_project,
    to_spectral,
)


@dataclass(frozen=True)
class VortexSheetParams:
    """Smoothed, randomly perturbed double shear layer."""

    rho: float = 0.1
    delta: float = 0.025
    p_modes: int = 10

    def __post_init__(self):
        if self.rho <= 0:
            raise ConfigurationError(f"rho must be positive, got {self.rho}")
        if self.delta < 0:
            raise ConfigurationError(f"delta must be >= 0, got {self.delta}")
        if self.p_modes < 1:
            raise ConfigurationError(f"p_modes must be >= 1, got {self.p_modes}")


@dataclass(frozen=True)
class FbbParams:
    """Fractional Brownian bridge with Hurst index in (0, 1)."""

    hurst: float

    def __post_init__(self):
        if not 0 < self.hurst < 1:
            raise ConfigurationError(f"hurst must be in (0,1), got {self.hurst}")


def eval_perturbation(
    grid: Grid, params: VortexSheetParams, alpha: np.ndarray, beta: np.ndarray
) -> np.ndarray:
    """delta * sum_k alpha_k sin(2 pi k x1 - beta_k) on the collocation points."""
    k = np.arange(1, params.p_modes + 1).reshape(-1, 1)
    return params.delta * np.sum(
        alpha.reshape(-1, 1) * np.sin(2 * np.pi * k * grid.x - beta.reshape(-1, 1)),
        axis=0,
    )


def perturbation_sigma_delta(
    grid: Grid, params: VortexSheetParams, rng: np.random.Generator
) -> np.ndarray:
    """Sample the seam perturbation profile; |result| <= delta * p pointwise."""
    alpha = rng.uniform(0.0, 1.0, params.p_modes)
    beta = rng.uniform(0.0, 2 * np.pi, params.p_modes)
    return eval_perturbation(grid, params, alpha, beta)


def flat_vortex_sheet(
    grid: Grid, params: VortexSheetParams, rng: np.random.Generator
) -> SpectralField:
    """tanh shear layer with jump lines near x2 = 0.25 and 0.75, perturbed seam."""
    sigma_delta = perturbation_sigma_delta(grid, params, rng)
    x2 = grid.x.reshape(1, -1)
    lower = np.tanh(2 * np.pi * (x2 - 0.25) / params.rho)
    upper = np.tanh(2 * np.pi * (0.75 - x2) / params.rho)
    in_lower = (x2 + sigma_delta.reshape(-1, 1)) <= 0.5
    u1 = np.where(in_lower, np.broadcast_to(lower, (grid.n, grid.n)),
                  np.broadcast_to(upper, (grid.n, grid.n)))
    values = np.stack([u1, np.zeros_like(u1)])
    return leray_project(to_spectral(PhysicalField(grid, values)))


# 1D exponential factors: sin(2 pi k x) = sum_s f_sin(s) e^{2 pi i s k x}, s = +-1
_F_POS = np.array([-0.5j, 0.5])  # [sin, cos] at s = +1
_F_NEG = np.array([+0.5j, 0.5])  # [sin, cos] at s = -1


def assemble_brownian_bridge_half(
    grid: Grid, hurst: float, alphas: np.ndarray
) -> np.ndarray:
    """Half-layout coefficients of sum_k ||k||^{-(H+1)} sum_mn a_k^{mn} sc_m sc_n.

    alphas has shape (K, K, 2, 2) indexed by (k1-1, k2-1, m, n) with
    m, n in {0: sin, 1: cos}; the sum runs over 1 <= k1, k2 <= K.
    """
    K = alphas.shape[0]
    n = grid.n
    if 2 * K > n:
        raise ConfigurationError(f"K={K} unrepresentable on grid n={n}")
    k1 = np.arange(1, K + 1).reshape(-1, 1)
    k2 = np.arange(1, K + 1).reshape(1, -1)
    amp = (k1**2 + k2**2) ** (-(hurst + 1) / 2)
    w_pos = np.einsum("abmn,m,n->ab", alphas, _F_POS, _F_POS)
    w_neg = np.einsum("abmn,m,n->ab", alphas, _F_NEG, _F_POS)
    half = np.zeros((n, n // 2 + 1), dtype=complex)
    half[1 : K + 1, 1 : K + 1] = amp * w_pos
    half[n - 1 : n - K - 1 : -1, 1 : K + 1] = amp * w_neg
    return half


def fractional_brownian_bridge(
    grid: Grid, params: FbbParams, rng: np.random.Generator
) -> SpectralField:
    """Two independent scalar bridges as velocity components, Leray-projected.

    Modes run over 1 <= k1, k2 <= n/2 - 1 (the singular k = 0 term and the
    degenerate zero-component wavevectors are excluded); per-mode amplitude
    ||k||^{-(H+1)} gives the shell spectrum ~ k^{-(2H+1)}.
    """
    K = grid.n // 2 - 1
    comps = []
    for _ in range(2):
        alphas = rng.uniform(-1.0, 1.0, (K, K, 2, 2))
        comps.append(assemble_brownian_bridge_half(grid, params.hurst, alphas))
    coeffs = full_from_half(np.stack(comps))
    return leray_project(SpectralField(grid, coeffs))


def taylor_green(grid: Grid, amplitude: float = 1.0) -> SpectralField:
    """A(-cos(2 pi x1) sin(2 pi x2), sin(2 pi x1) cos(2 pi x2)).

    Divergence-free; under zero-noise Navier-Stokes dynamics it decays
    per-mode as exp(-8 pi^2 nu t) because the advection term is a gradient.
    """
    n = grid.n
    half = np.zeros((2, n, n // 2 + 1), dtype=complex)
    a = amplitude
    # u1 = -a cos sin: coefficient at (s1, s2=+1): -a * f_cos(s1) f_sin(+1)
    half[0, 1, 1] = -a * _F_POS[1] * _F_POS[0]
    half[0, n - 1, 1] = -a * _F_NEG[1] * _F_POS[0]
    # u2 = +a sin cos
    half[1, 1, 1] = a * _F_POS[0] * _F_POS[1]
    half[1, n - 1, 1] = a * _F_NEG[0] * _F_POS[1]
    return SpectralField(grid, full_from_half(half))
