"""Fourier representation of periodic 2D vector fields and spatial operators.

Fields live on the unit torus [0,1]^2. Spectral coefficients follow the
Fourier-series convention u(x) = sum_k u_hat(k) exp(2*pi*i*k.x), so the
forward transform divides by n^2 and Parseval reads
sum_k |u_hat|^2 = integral |u|^2 dx. Differentiation multiplies by 2*pi*i*k.

Two coefficient layouts are used:

* the public full layout, shape (..., n, n), both axes in numpy fft order;
* a half layout, shape (..., n, n//2 + 1), the rfft convention, used by the
  hot paths (products, time stepping) where fields are real in physical
  space and Hermitian symmetry is enforced by construction.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np


class ConfigurationError(ValueError):
    """Inconsistent grid sizes or unrepresentable parameters."""


@dataclass(frozen=True)
class Grid:
    """Uniform n x n collocation grid on [0,1]^2, n even and >= 8."""

    n: int
    domain_length: float = 1.0

    def __post_init__(self):
        if self.n < 8 or self.n % 2 != 0:
            raise ConfigurationError(f"grid n must be even and >= 8, got {self.n}")
        if self.domain_length != 1.0:
            raise ConfigurationError("only the unit torus is supported")

    @cached_property
    def x(self) -> np.ndarray:
        """Collocation points m/n along one axis."""
        return np.arange(self.n) / self.n

    @cached_property
    def k1(self) -> np.ndarray:
        """Integer wavenumbers along axis 0 (fft order), shape (n, 1)."""
        return np.fft.fftfreq(self.n, d=1.0 / self.n).reshape(-1, 1)

    @cached_property
    def k2(self) -> np.ndarray:
        """Integer wavenumbers along axis 1 (fft order), shape (1, n)."""
        return np.fft.fftfreq(self.n, d=1.0 / self.n).reshape(1, -1)

    @cached_property
    def ksq(self) -> np.ndarray:
        return self.k1**2 + self.k2**2

    @cached_property
    def k2_half(self) -> np.ndarray:
        """Wavenumbers along axis 1 in the half (rfft) layout, shape (1, n//2+1).

        The Nyquist column carries -n/2, matching the full-layout fftfreq
        convention so that half- and full-layout operators agree exactly.
        """
        k = np.arange(self.n // 2 + 1, dtype=float)
        k[-1] = -self.n / 2
        return k.reshape(1, -1)

    @cached_property
    def ksq_half(self) -> np.ndarray:
        return self.k1**2 + self.k2_half**2

    @cached_property
    def half_weights(self) -> np.ndarray:
        """Parseval weights for the half layout: interior columns count twice."""
        w = np.full(self.n // 2 + 1, 2.0)
        w[0] = 1.0
        w[-1] = 1.0
        return w.reshape(1, -1)


@dataclass(frozen=True, eq=False)
class SpectralField:
    """Velocity field as full-layout Fourier coefficients, shape (2, n, n)."""

    grid: Grid
    coeffs: np.ndarray

    def __post_init__(self):
        n = self.grid.n
        if self.coeffs.shape != (2, n, n):
            raise ConfigurationError(
                f"coeffs shape {self.coeffs.shape} does not match grid n={n}"
            )

    @classmethod
    def zero(cls, grid: Grid) -> "SpectralField":
        return cls(grid, np.zeros((2, grid.n, grid.n), dtype=complex))

    def with_coeffs(self, coeffs: np.ndarray) -> "SpectralField":
        return SpectralField(self.grid, coeffs)


@dataclass(frozen=True, eq=False)
class SpectralScalar:
    """Scalar field (e.g. vorticity) as full-layout coefficients, shape (n, n)."""

    grid: Grid
    coeffs: np.ndarray

    def __post_init__(self):
        n = self.grid.n
        if self.coeffs.shape != (n, n):
            raise ConfigurationError(
                f"coeffs shape {self.coeffs.shape} does not match grid n={n}"
            )


@dataclass(frozen=True, eq=False)
class PhysicalField:
    """Velocity at collocation points, shape (2, n, n), real."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        n = self.grid.n
        if self.values.shape != (2, n, n):
            raise ConfigurationError(
                f"values shape {self.values.shape} does not match grid n={n}"
            )


# ---------------------------------------------------------------------------
# transforms

def to_physical(f: SpectralField) -> PhysicalField:
    """Inverse transform; takes the real part (fields are Hermitian)."""
    n = f.grid.n
    values = np.fft.ifft2(f.coeffs, axes=(-2, -1)).real * n**2
    return PhysicalField(f.grid, values)


def to_spectral(g: PhysicalField) -> SpectralField:
    n = g.grid.n
    coeffs = np.fft.fft2(g.values, axes=(-2, -1)) / n**2
    return SpectralField(g.grid, coeffs)


def half_from_full(coeffs: np.ndarray) -> np.ndarray:
    """Half layout of a Hermitian full-layout array (drops redundant columns)."""
    n = coeffs.shape[-1]
    return np.ascontiguousarray(coeffs[..., : n // 2 + 1])


def full_from_half(half: np.ndarray) -> np.ndarray:
    """Expand half-layout coefficients to the full layout by Hermitian mirroring."""
    n = half.shape[-2]
    out = np.zeros(half.shape[:-1] + (n,), dtype=complex)
    out[..., : n // 2 + 1] = half
    # column -j is conj of column j with axis-0 index negated
    mirrored = np.conj(np.roll(half[..., ::-1, :], 1, axis=-2))
    out[..., n // 2 + 1 :] = mirrored[..., 1 : n // 2][..., ::-1]
    return out


def half_to_physical(grid: Grid, half: np.ndarray) -> np.ndarray:
    return np.fft.irfft2(half, s=(grid.n, grid.n), axes=(-2, -1)) * grid.n**2


def physical_to_half(grid: Grid, values: np.ndarray) -> np.ndarray:
    return np.fft.rfft2(values, axes=(-2, -1)) / grid.n**2


# ---------------------------------------------------------------------------
# linear operators (full layout)

def leray_project(f: SpectralField) -> SpectralField:
    """Remove the gradient part per mode: u_hat -= k (k.u_hat)/|k|^2."""
    g = f.grid
    ksq = np.where(g.ksq == 0, 1.0, g.ksq)
    kdotu = g.k1 * f.coeffs[0] + g.k2 * f.coeffs[1]
    factor = kdotu / ksq
    out = f.coeffs.copy()
    out[0] -= g.k1 * factor
    out[1] -= g.k2 * factor
    return f.with_coeffs(out)


def fourier_truncate(f: SpectralField, n_keep: int) -> SpectralField:
    """Zero all modes with |k|_inf > n_keep."""
    g = f.grid
    if n_keep > g.n // 2:
        raise ConfigurationError(f"n_keep={n_keep} exceeds grid band {g.n // 2}")
    mask = (np.abs(g.k1) <= n_keep) & (np.abs(g.k2) <= n_keep)
    return f.with_coeffs(f.coeffs * mask)


def curl2d(u: SpectralField) -> SpectralScalar:
    """Scalar vorticity d1 u2 - d2 u1 on the unit torus."""
    g = u.grid
    eta = 2j * np.pi * (g.k1 * u.coeffs[1] - g.k2 * u.coeffs[0])
    return SpectralScalar(g, eta)


def l2_norm_sq(f) -> float:
    """||f||_{L^2}^2 = sum_k |f_hat|^2 (vector or scalar spectral field)."""
    return float(np.sum(np.abs(f.coeffs) ** 2))


def grad_l2_norm_sq(f) -> float:
    """||grad f||_{L^2}^2 = sum_k 4 pi^2 |k|^2 |f_hat|^2."""
    return float(4 * np.pi**2 * np.sum(f.grid.ksq * np.abs(f.coeffs) ** 2))


def divergence_sup(f: SpectralField) -> float:
    """max_k |k . u_hat(k)| (2*pi factor omitted; zero for solenoidal fields)."""
    g = f.grid
    return float(np.max(np.abs(g.k1 * f.coeffs[0] + g.k2 * f.coeffs[1])))


# ---------------------------------------------------------------------------
# half-layout kernels used by the time stepper

def leray_half(grid: Grid, half: np.ndarray) -> np.ndarray:
    ksq = np.where(grid.ksq_half == 0, 1.0, grid.ksq_half)
    kdotu = grid.k1 * half[0] + grid.k2_half * half[1]
    factor = kdotu / ksq
    out = half.copy()
    out[0] -= grid.k1 * factor
    out[1] -= grid.k2_half * factor
    return out


def energy_half(grid: Grid, half: np.ndarray) -> float:
    return float(np.sum(grid.half_weights * np.abs(half) ** 2))


def grad_energy_half(grid: Grid, half: np.ndarray) -> float:
    return float(
        4 * np.pi**2 * np.sum(grid.half_weights * grid.ksq_half * np.abs(half) ** 2)
    )


def curl_half(grid: Grid, half: np.ndarray) -> np.ndarray:
    return 2j * np.pi * (grid.k1 * half[1] - grid.k2_half * half[0])


def _pad_rows(grid: Grid, half: np.ndarray, m: int) -> np.ndarray:
    """Embed half-layout coefficients into the band of an m x m grid (m >= n)."""
    n = grid.n
    shape = half.shape[:-2] + (m, m // 2 + 1)
    out = np.zeros(shape, dtype=complex)
    out[..., : n // 2, : n // 2 + 1] = half[..., : n // 2, :]
    out[..., m - n // 2 :, : n // 2 + 1] = half[..., n // 2 :, :]
    return out


def _unpad_rows(grid: Grid, padded: np.ndarray) -> np.ndarray:
    n = grid.n
    m = padded.shape[-2]
    shape = padded.shape[:-2] + (n, n // 2 + 1)
    out = np.empty(shape, dtype=complex)
    out[..., : n // 2, :] = padded[..., : n // 2, : n // 2 + 1]
    out[..., n // 2 :, :] = padded[..., m - n // 2 :, : n // 2 + 1]
    return out


def zero_nyquist_half(half: np.ndarray) -> np.ndarray:
    """Zero the unpaired Nyquist line (k1 = -n/2 row, k2 = -n/2 column).

    Products of band-limited fields have independent +n/2 and -n/2 content
    that the single-slot n-grid layout cannot represent; the solver band is
    therefore the open band |k|_inf <= n/2 - 1.
    """
    out = half.copy()
    n = half.shape[-2]
    out[..., n // 2, :] = 0.0
    out[..., :, -1] = 0.0
    return out


def advection_half(grid: Grid, half: np.ndarray, dealias: str = "three_halves") -> np.ndarray:
    """-P P_N(u . grad u) in the half layout.

    Uses the rotational form: u.grad u = eta x u + grad(|u|^2/2) and the
    gradient part is annihilated by the projection, so only
    (-eta u2, eta u1) is formed pseudo-spectrally. Input and output are
    restricted to the open band (see zero_nyquist_half), which keeps the
    discrete advection exactly energy-neutral: <N(u), u> = 0 to roundoff.
    """
    n = grid.n
    half = zero_nyquist_half(half)
    eta = curl_half(grid, half)
    stack = np.concatenate([half, eta[None]], axis=0)

    if dealias == "three_halves":
        m = 3 * n // 2
        padded = _pad_rows(grid, stack, m)
        phys = np.fft.irfft2(padded, s=(m, m), axes=(-2, -1)) * m**2
        u1, u2, eta_p = phys
        prod = np.stack([-eta_p * u2, eta_p * u1])
        prod_half = np.fft.rfft2(prod, axes=(-2, -1)) / m**2
        adv = _unpad_rows(grid, prod_half)
    else:
        work = stack
        if dealias == "two_thirds":
            cutoff = n // 3
            mask = (np.abs(grid.k1) <= cutoff) & (grid.k2_half <= cutoff)
            work = stack * mask
        elif dealias != "none":
            raise ConfigurationError(f"unknown dealias mode {dealias!r}")
        phys = np.fft.irfft2(work, s=(n, n), axes=(-2, -1)) * n**2
        u1, u2, eta_p = phys
        prod = np.stack([-eta_p * u2, eta_p * u1])
        adv = np.fft.rfft2(prod, axes=(-2, -1)) / n**2
        if dealias == "two_thirds":
            adv = adv * mask

    return leray_half(grid, -zero_nyquist_half(adv))


def nonlinear_term(u: SpectralField, dealias: str = "three_halves") -> SpectralField:
    """Projected negative advection -P P_N(u . grad u).

    The input is treated as a real (Hermitian) field; the result is
    divergence-free and vanishes whenever u . grad u is a pure gradient.
    """
    half = half_from_full(u.coeffs)
    adv = advection_half(u.grid, half, dealias=dealias)
    return u.with_coeffs(full_from_half(adv))
