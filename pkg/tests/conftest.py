import numpy as np
import pytest

from stoch_euler import spectral as sp


def random_physical(n: int, seed: int) -> sp.PhysicalField:
    rng = np.random.default_rng(seed)
    return sp.PhysicalField(sp.Grid(n), rng.standard_normal((2, n, n)))


def random_divfree(n: int, seed: int, band: int | None = None) -> sp.SpectralField:
    f = sp.leray_project(sp.to_spectral(random_physical(n, seed)))
    if band is not None:
        f = sp.fourier_truncate(f, band)
    return f


def dft_direct(values: np.ndarray) -> np.ndarray:
    """O(n^4) direct DFT oracle, coefficients in fft layout, series convention."""
    n = values.shape[-1]
    k = np.fft.fftfreq(n, d=1.0 / n)
    x = np.arange(n) / n
    w = np.exp(-2j * np.pi * np.outer(k, x))  # (k, x)
    return np.einsum("ka,lb,cab->ckl", w, w, values) / n**2


def spectrum_field(n: int, alpha: float, master: list) -> sp.PhysicalField:
    """Two-component field with per-mode energy ~ ||k||^{-2(alpha+1)}.

    Uses phases from a fixed master table so coarser grids are restrictions
    of finer ones.
    """
    K = n // 2 - 1
    half = np.zeros((2, n, n // 2 + 1), dtype=complex)
    k1 = np.arange(1, K + 1).reshape(-1, 1)
    k2 = np.arange(1, K + 1).reshape(1, -1)
    amp = (k1**2 + k2**2) ** (-(alpha + 1) / 2)
    for c in range(2):
        half[c, 1 : K + 1, 1 : K + 1] = amp * np.exp(2j * np.pi * master[c][:K, :K, 0])
        half[c, n - 1 : n - K - 1 : -1, 1 : K + 1] = amp * np.exp(
            2j * np.pi * master[c][:K, :K, 1]
        )
    values = np.fft.irfft2(half, s=(n, n), axes=(-2, -1)) * n**2
    return sp.PhysicalField(sp.Grid(n), values)


@pytest.fixture(scope="session")
def phase_master():
    rng = np.random.default_rng(2024)
    return [rng.uniform(0, 1, (127, 127, 2)) for _ in range(2)]
