"""Measured quantities: structure functions, seminorms, and energy budgets.

Structure functions use the ball-AVERAGED convention by default,

    S_p(v; r)^p = mean over integer offsets |h|_2 <= r*n of
                  integral_D |v(x+h) - v(x)|^p dx,

with periodic wraparound; the `integral` normalization multiplies the mean
by the discrete measure of the pixel disk (#offsets / n^2). For p = 2 the
offset sums are evaluated exactly via FFT correlation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .spectral import (
    ConfigurationError,
    PhysicalField,
    SpectralField,
    curl2d,
    grad_l2_norm_sq,
    l2_norm_sq,
    to_physical,
)

R_MAX = np.sqrt(2) / 2


class RadiusUnresolvedError(ValueError):
    """Requested radius is below one grid cell."""


@dataclass(frozen=True, eq=False)
class StructureFunctionTable:
    """S_p over a radius grid, per snapshot and time-integrated."""

    radii: np.ndarray
    p: int
    times: np.ndarray
    values_snapshot: np.ndarray  # shape (len(times), len(radii))
    values_time_integrated: np.ndarray  # shape (len(radii),)


@dataclass(frozen=True)
class ModulusFit:
    """Least-squares power law S ~ prefactor * r^exponent on log-log points."""

    exponent: float
    prefactor: float
    fit_range: tuple
    residual: float


def _offset_radius_sq(n: int) -> np.ndarray:
    """|h*n|^2 for every offset in fft index order, shape (n, n)."""
    s = ((np.arange(n) + n // 2) % n) - n // 2
    return (s.reshape(-1, 1) ** 2 + s.reshape(1, -1) ** 2).astype(float)


def _check_radius(n: int, r: float) -> None:
    if not 0 < r <= R_MAX + 1e-12:
        raise ValueError(f"radius must be in (0, sqrt(2)/2], got {r}")
    if np.floor(r * n) < 1:
        raise RadiusUnresolvedError(
            f"radius_unresolved: r={r} is below one grid cell 1/{n}"
        )


def increment_sq_integrals(v: PhysicalField) -> np.ndarray:
    """integral_D |v(x+h)-v(x)|^2 dx for every offset h, via FFT correlation."""
    n = v.grid.n
    spec = np.fft.fft2(v.values, axes=(-2, -1))
    # correlation theorem: sum_x v(x) v(x+h) = ifft2(|fft2 v|^2)[h] for real v
    corr = np.fft.ifft2(np.sum(np.abs(spec) ** 2, axis=0)).real
    return 2.0 * (corr[0, 0] - corr) / n**2


def _increment_p_integrals(v: PhysicalField, offsets: np.ndarray, p: int) -> np.ndarray:
    """integral_D |v(x+h)-v(x)|^p dx for the given offsets (roll loop)."""
    out = np.empty(len(offsets))
    for i, (h1, h2) in enumerate(offsets):
        shifted = np.roll(v.values, (-int(h1), -int(h2)), axis=(-2, -1))
        diff_sq = np.sum((shifted - v.values) ** 2, axis=0)
        out[i] = np.mean(diff_sq ** (p / 2.0))
    return out


def structure_function(
    v: PhysicalField, r: float, p: int = 2, normalization: str = "average"
) -> float:
    """p-th order structure function over the pixel disk of radius r."""
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    if normalization not in ("average", "integral"):
        raise ValueError(f"unknown normalization {normalization!r}")
    n = v.grid.n
    _check_radius(n, r)
    ball = _offset_radius_sq(n) <= (r * n) ** 2
    count = int(np.sum(ball))
    if p == 2:
        total = float(np.sum(increment_sq_integrals(v)[ball]))
    else:
        offs = np.argwhere(ball)
        offs = ((offs + n // 2) % n) - n // 2
        total = float(np.sum(_increment_p_integrals(v, offs, p)))
    moment = total / count if normalization == "average" else total / n**2
    return moment ** (1.0 / p)


def structure_function_time_integrated(
    snapshots: list, r: float, p: int = 2, normalization: str = "average"
) -> float:
    """Trapezoidal time quadrature of S_p(v(t); r)^p, then the 1/p root."""
    if len(snapshots) < 2:
        raise ValueError("need at least 2 snapshots")
    grids = {snap.grid.n for _, snap in snapshots}
    if len(grids) != 1:
        raise ConfigurationError(f"snapshots on mismatched grids {grids}")
    times = np.array([t for t, _ in snapshots])
    vals = np.array(
        [
            structure_function(to_physical(snap), r, p, normalization) ** p
            for _, snap in snapshots
        ]
    )
    return float(np.trapezoid(vals, times)) ** (1.0 / p)


def structure_function_table(
    snapshots: list, radii, p: int = 2, normalization: str = "average"
) -> StructureFunctionTable:
    """S_p per (snapshot, radius) and the time-integrated values per radius."""
    if len(snapshots) < 2:
        raise ValueError("need at least 2 snapshots")
    radii = np.asarray(radii, dtype=float)
    times = np.array([t for t, _ in snapshots])
    n = snapshots[0][1].grid.n
    rsq = _offset_radius_sq(n)
    values = np.empty((len(times), len(radii)))
    for it, (_, snap) in enumerate(snapshots):
        if p == 2:
            d2 = increment_sq_integrals(to_physical(snap))
            for ir, r in enumerate(radii):
                _check_radius(n, r)
                ball = rsq <= (r * n) ** 2
                total = float(np.sum(d2[ball]))
                count = int(np.sum(ball))
                moment = total / count if normalization == "average" else total / n**2
                values[it, ir] = np.sqrt(moment)
        else:
            for ir, r in enumerate(radii):
                values[it, ir] = structure_function(
                    to_physical(snap), r, p, normalization
                )
    integrated = np.trapezoid(values**p, times, axis=0) ** (1.0 / p)
    return StructureFunctionTable(radii, p, times, values, integrated)


def disk_average_identity_check(v: SpectralField, r: float) -> tuple:
    """Both sides of  integral_D avg_{B_r}|h . grad v|^2 dh dx = (r^2/4)||grad v||^2.

    The left side is quadratured over the discrete pixel-disk offsets; the
    gradient moments are computed spectrally, so the check isolates the
    shift-quadrature error.
    """
    g = v.grid
    n = g.n
    _check_radius(n, r)
    rsq = _offset_radius_sq(n)
    ball = rsq <= (r * n) ** 2
    s = (((np.arange(n) + n // 2) % n) - n // 2) / n
    h1 = np.broadcast_to(s.reshape(-1, 1), (n, n))[ball]
    h2 = np.broadcast_to(s.reshape(1, -1), (n, n))[ball]
    esq = np.abs(v.coeffs) ** 2
    a = float(4 * np.pi**2 * np.sum(g.k1**2 * esq))
    b = float(4 * np.pi**2 * np.sum(g.k1 * g.k2 * esq))
    c = float(4 * np.pi**2 * np.sum(g.k2**2 * esq))
    lhs = float(np.mean(h1**2) * a + 2 * np.mean(h1 * h2) * b + np.mean(h2**2) * c)
    rhs = (r**2 / 4.0) * (a + c)
    return lhs, rhs


def poincare_inequality_check(v: SpectralField, r: float, C: float = 1.0) -> bool:
    """||eta||^2 <= (8/r^2) S_2(v;r)^2 + C r^2 ||grad eta||^2 with eta = curl v."""
    eta = curl2d(v)
    lhs = l2_norm_sq(eta)
    s2 = structure_function(to_physical(v), r, 2)
    rhs = (8.0 / r**2) * s2**2 + C * r**2 * grad_l2_norm_sq(eta)
    return bool(lhs <= rhs)


def sobolev_seminorm(v: PhysicalField, s: float, p: int = 2) -> float:
    """Dyadic annulus-sum estimator of the Sobolev-Slobodeckij seminorm.

    Annuli have radii r_i = 2^{-i} sqrt(2)/2 and each contributes
    r_{i+1}^{-(d + s p)} * sum over offsets r_{i+1} < |h| <= r_i of the
    increment p-integral times the cell measure 1/n^2. The sum stops at the
    grid scale (r_i < 2/n), so near that scale the estimator is a lower bound.
    Returns the seminorm itself (p-th root of the sum).
    """
    if not 0 < s < 1:
        raise ValueError(f"s must be in (0,1), got {s}")
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    n = v.grid.n
    rsq = _offset_radius_sq(n)
    d2 = increment_sq_integrals(v) if p == 2 else None
    total = 0.0
    i = 0
    while True:
        r_out = 2.0**-i * R_MAX
        if r_out < 2.0 / n:
            break
        r_in = r_out / 2.0
        ann = (rsq > (r_in * n) ** 2) & (rsq <= (r_out * n) ** 2)
        if np.any(ann):
            if p == 2:
                contrib = float(np.sum(d2[ann]))
            else:
                offs = np.argwhere(ann)
                offs = ((offs + n // 2) % n) - n // 2
                contrib = float(np.sum(_increment_p_integrals(v, offs, p)))
            total += r_in ** (-(2 + s * p)) * contrib / n**2
        i += 1
    return total ** (1.0 / p)


def sobolev_seminorm_spectral(v: SpectralField, s: float) -> float:
    """Spectral H^s seminorm (sum_k (2 pi |k|)^{2s} |v_hat|^2)^{1/2}, p = 2 only."""
    if not 0 < s < 1:
        raise ValueError(f"s must be in (0,1), got {s}")
    g = v.grid
    w = (4 * np.pi**2 * g.ksq) ** s
    return float(np.sum(w * np.abs(v.coeffs) ** 2)) ** 0.5


def gagliardo_seminorm_sq(v: PhysicalField, alpha: float) -> float:
    """Discrete Gagliardo double integral for p = 2: all-offset sum of
    increment integrals weighted by |h|^{-(2 + 2 alpha)}."""
    n = v.grid.n
    rsq = _offset_radius_sq(n) / n**2
    d2 = increment_sq_integrals(v)
    mask = rsq > 0
    return float(np.sum(d2[mask] / rsq[mask] ** (1 + alpha)) / n**2)


def dissipation_integral(
    times: np.ndarray,
    grad_sq: np.ndarray,
    nu: float,
    t: float,
    n_rect: int = 10000,
) -> float:
    """Left-endpoint Riemann sum of 2 nu ||grad u(s)||^2 over [0, t].

    The recorded series is sampled at the nearest recorded time at or before
    each rectangle's left endpoint.
    """
    if n_rect < 1:
        raise ValueError(f"n_rect must be >= 1, got {n_rect}")
    times = np.asarray(times, dtype=float)
    if times[-1] < t - 1e-12:
        raise ValueError(f"series ends at {times[-1]} before t={t}")
    left = np.arange(n_rect) * (t / n_rect)
    idx = np.clip(np.searchsorted(times, left + 1e-15, side="right") - 1, 0, None)
    return float(2.0 * nu * np.sum(np.asarray(grad_sq)[idx]) * (t / n_rect))


def energy_balance_residual(
    times: np.ndarray,
    mean_energy: np.ndarray,
    mean_cum_dissipation: np.ndarray,
    sigma_bar: float,
) -> np.ndarray:
    """mean E(t) + mean 2 nu int ||grad u||^2 - mean E(0) - sigma_bar t."""
    times = np.asarray(times, dtype=float)
    return (
        np.asarray(mean_energy)
        + np.asarray(mean_cum_dissipation)
        - mean_energy[0]
        - sigma_bar * times
    )


def fit_modulus(
    radii: np.ndarray, values: np.ndarray, fit_range: tuple | None = None
) -> ModulusFit:
    """Least-squares log-log power-law fit of S(r) within fit_range."""
    radii = np.asarray(radii, dtype=float)
    values = np.asarray(values, dtype=float)
    if fit_range is None:
        fit_range = (float(radii.min()), float(radii.max()))
    sel = (radii >= fit_range[0] - 1e-15) & (radii <= fit_range[1] + 1e-15)
    if np.sum(sel) < 4:
        raise ValueError(f"need >= 4 radii in fit range, got {int(np.sum(sel))}")
    if np.any(values[sel] <= 0):
        raise ValueError("nonpositive structure-function values in fit range")
    logr = np.log(radii[sel])
    logs = np.log(values[sel])
    slope, intercept = np.polyfit(logr, logs, 1)
    residual = float(np.max(np.abs(logs - (slope * logr + intercept))))
    return ModulusFit(float(slope), float(np.exp(intercept)), fit_range, residual)


def shell_spectrum(f: SpectralField) -> tuple:
    """Energy binned by integer shells round(|k|); returns (shells, energy)."""
    g = f.grid
    kmag = np.sqrt(g.ksq)
    shell = np.floor(kmag + 0.5).astype(int)
    e_mode = np.sum(np.abs(f.coeffs) ** 2, axis=0)
    n_shells = g.n // 2 + 1
    e = np.bincount(
        shell.ravel(), weights=e_mode.ravel(), minlength=n_shells
    )[:n_shells]
    return np.arange(n_shells), e
