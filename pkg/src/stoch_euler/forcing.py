"""Divergence-free trigonometric forcing basis and white-in-time increments.

The basis element with indices (i, j), i, j >= 1, is

    e_ij(x) = 2/sqrt(i^2+j^2) * ( j cos(2 pi i x1) cos(2 pi j x2),
                                  i sin(2 pi i x1) sin(2 pi j x2) )

which is divergence-free with unit L^2 norm and ||curl e_ij||^2 = 4 pi^2 (i^2+j^2).
A noise increment over a step dt is sum_ij b_ij e_ij xi_ij sqrt(dt) with
i.i.d. standard normal xi_ij, so E||increment||^2 = sigma_bar * dt.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .spectral import ConfigurationError, Grid, SpectralField, full_from_half


def _basis_entries(i: int, j: int, n: int):
    """Half-layout sparse entries (component, row, col, value) of e_ij.

    cos(a)cos(b) has coefficient 1/4 at the four modes (+-i, +-j);
    sin(a)sin(b) has -s1*s2/4 there. The half layout stores the k2 = +j
    column only (rows +-i), the k2 = -j entries being conjugate-implied.
    """
    c = 2.0 / np.sqrt(i * i + j * j)
    rows = np.array([i, n - i, i, n - i])
    cols = np.array([j, j, j, j])
    comps = np.array([0, 0, 1, 1])
    vals = np.array(
        [c * j / 4, c * j / 4, -c * i / 4, c * i / 4], dtype=complex
    )
    return comps, rows, cols, vals


@dataclass(frozen=True, eq=False)
class ForcingBasis:
    """Truncated forcing family {e_ij, b_ij} for 1 <= i, j <= n_b on a grid."""

    grid: Grid
    n_b: int
    sigma: float
    b: np.ndarray | None = None  # (n_b, n_b) coefficient table

    def __post_init__(self):
        if self.n_b < 1:
            raise ConfigurationError(f"n_b must be >= 1, got {self.n_b}")
        if self.sigma < 0:
            raise ConfigurationError(f"sigma must be >= 0, got {self.sigma}")
        if 2 * self.n_b > self.grid.n // 2:
            raise ConfigurationError(
                f"basis index {self.n_b} unrepresentable on grid n={self.grid.n}"
            )
        if self.b is None:
            object.__setattr__(
                self, "b", np.full((self.n_b, self.n_b), float(self.sigma))
            )
        else:
            b = np.asarray(self.b, dtype=float)
            if b.shape != (self.n_b, self.n_b):
                raise ConfigurationError(
                    f"coefficient table shape {b.shape} != ({self.n_b}, {self.n_b})"
                )
            object.__setattr__(self, "b", b)
        # flattened sparse assembly tables, row-major in (i, j)
        comps, rows, cols, vals, draws = [], [], [], [], []
        for idx_i in range(self.n_b):
            for idx_j in range(self.n_b):
                cm, rw, cl, vl = _basis_entries(idx_i + 1, idx_j + 1, self.grid.n)
                comps.append(cm)
                rows.append(rw)
                cols.append(cl)
                vals.append(vl * self.b[idx_i, idx_j])
                draws.append(np.full(4, idx_i * self.n_b + idx_j))
        object.__setattr__(self, "_comps", np.concatenate(comps))
        object.__setattr__(self, "_rows", np.concatenate(rows))
        object.__setattr__(self, "_cols", np.concatenate(cols))
        object.__setattr__(self, "_vals", np.concatenate(vals))
        object.__setattr__(self, "_draw_idx", np.concatenate(draws))

    def increment_half(self, dt: float, rng: np.random.Generator) -> tuple:
        """Raw gaussians and the half-layout coefficients of sigma*dW over dt."""
        xi = rng.standard_normal((self.n_b, self.n_b))
        out = np.zeros((2, self.grid.n, self.grid.n // 2 + 1), dtype=complex)
        weights = self._vals * xi.ravel()[self._draw_idx] * np.sqrt(dt)
        np.add.at(out, (self._comps, self._rows, self._cols), weights)
        return xi, out


@dataclass(frozen=True, eq=False)
class NoiseIncrement:
    """One sampled increment sigma*dW over a step of size dt."""

    dt: float
    field: SpectralField
    gaussians: np.ndarray


def eval_basis(grid: Grid, i: int, j: int) -> SpectralField:
    """Exact spectral coefficients of the basis element e_ij."""
    if i < 1 or j < 1 or 2 * max(i, j) > grid.n // 2:
        raise ConfigurationError(
            f"basis index ({i},{j}) unrepresentable on grid n={grid.n}"
        )
    half = np.zeros((2, grid.n, grid.n // 2 + 1), dtype=complex)
    comps, rows, cols, vals = _basis_entries(i, j, grid.n)
    half[comps, rows, cols] = vals
    return SpectralField(grid, full_from_half(half))


def sigma_bar(basis: ForcingBasis) -> float:
    """Total noise intensity sum_ij b_ij^2 (the mean energy-input rate)."""
    return float(np.sum(basis.b**2))


def rho_bar(basis: ForcingBasis) -> float:
    """Curl-weighted intensity sum_ij b_ij^2 * 4 pi^2 (i^2 + j^2)."""
    i = np.arange(1, basis.n_b + 1).reshape(-1, 1)
    j = np.arange(1, basis.n_b + 1).reshape(1, -1)
    return float(4 * np.pi**2 * np.sum(basis.b**2 * (i**2 + j**2)))


def sample_increment(
    basis: ForcingBasis, dt: float, rng: np.random.Generator
) -> NoiseIncrement:
    """Draw sigma*dW = sum_ij b_ij e_ij xi_ij sqrt(dt), consuming the stream
    in (i, j) row-major order."""
    if dt <= 0:
        raise ConfigurationError(f"dt must be positive, got {dt}")
    xi, half = basis.increment_half(dt, rng)
    return NoiseIncrement(dt, SpectralField(basis.grid, full_from_half(half)), xi)
