import numpy as np
import pytest

from stoch_euler import initial_conditions as ics
from stoch_euler import spectral as sp
from stoch_euler.diagnostics import shell_spectrum


class TestPerturbation:
    def test_zero_delta(self):
        g = sp.Grid(32)
        prof = ics.perturbation_sigma_delta(
            g, ics.VortexSheetParams(delta=0.0), np.random.default_rng(0)
        )
        assert np.all(prof == 0)

    def test_single_term(self):
        g = sp.Grid(64)
        prof = ics.eval_perturbation(
            g,
            ics.VortexSheetParams(delta=1.0, p_modes=1),
            np.array([1.0]),
            np.array([0.0]),
        )
        assert np.allclose(prof, np.sin(2 * np.pi * g.x), atol=1e-14)

    def test_default_bound(self):
        g = sp.Grid(64)
        params = ics.VortexSheetParams()
        for seed in range(20):
            prof = ics.perturbation_sigma_delta(g, params, np.random.default_rng(seed))
            assert np.max(np.abs(prof)) <= params.delta * params.p_modes + 1e-12
        assert params.delta * params.p_modes == pytest.approx(0.25)

    def test_periodic(self):
        g = sp.Grid(64)
        prof = ics.perturbation_sigma_delta(
            g, ics.VortexSheetParams(), np.random.default_rng(1)
        )
        # trigonometric polynomial sampled on the periodic grid: wraps around
        k = np.arange(1, 11)
        assert prof.shape == (64,)
        assert np.all(np.isfinite(prof))
        assert len(k) == 10


@pytest.fixture(scope="module")
def unperturbed():
    g = sp.Grid(64)
    field = ics.flat_vortex_sheet(
        g, ics.VortexSheetParams(delta=0.0), np.random.default_rng(0)
    )
    return g, field, sp.to_physical(field)


class TestVortexSheet:

    def test_zero_on_jump_line(self, unperturbed):
        g, _, phys = unperturbed
        row = g.n // 4  # x2 = 0.25
        assert np.max(np.abs(phys.values[0, :, row])) < 1e-12

    def test_value_below_midline(self, unperturbed):
        g, _, phys = unperturbed
        row = g.n // 2  # x2 = 0.5, still the lower branch
        assert phys.values[0, 0, row] == pytest.approx(np.tanh(5 * np.pi), abs=1e-12)

    def test_unperturbed_already_divergence_free(self):
        g = sp.Grid(64)
        rng = np.random.default_rng(0)
        raw = ics.perturbation_sigma_delta(g, ics.VortexSheetParams(delta=0.0), rng)
        assert np.all(raw == 0)
        field = ics.flat_vortex_sheet(
            g, ics.VortexSheetParams(delta=0.0), np.random.default_rng(0)
        )
        # projection was the identity: u2 stays zero, u1 is x1-independent
        phys = sp.to_physical(field)
        assert np.max(np.abs(phys.values[1])) < 1e-10
        assert np.max(np.abs(phys.values[0] - phys.values[0][0:1, :])) < 1e-10

    def test_reflection_symmetry(self, unperturbed):
        g, _, phys = unperturbed
        u1 = phys.values[0]
        reflected = u1[:, (-np.arange(g.n)) % g.n]
        assert np.max(np.abs(u1 - reflected)) < 1e-10

    def test_divergence_free_perturbed(self):
        g = sp.Grid(64)
        field = ics.flat_vortex_sheet(
            g, ics.VortexSheetParams(), np.random.default_rng(5)
        )
        assert sp.divergence_sup(field) < 1e-10 * np.sqrt(sp.l2_norm_sq(field))

    def test_reproducible(self):
        g = sp.Grid(32)
        a = ics.flat_vortex_sheet(g, ics.VortexSheetParams(), np.random.default_rng(9))
        b = ics.flat_vortex_sheet(g, ics.VortexSheetParams(), np.random.default_rng(9))
        assert np.array_equal(a.coeffs, b.coeffs)


class TestFractionalBrownianBridge:
    def test_amplitude_scaling_with_k(self):
        # fixed draws: coefficient magnitude scales as ||k||^{-(H+1)}
        g = sp.Grid(64)
        K = 31
        alphas = np.ones((K, K, 2, 2))
        for hurst in (0.25, 0.75):
            half = ics.assemble_brownian_bridge_half(g, hurst, alphas)
            a = abs(half[1, 1])   # ||k|| = sqrt(2)
            b = abs(half[2, 2])   # ||k|| = 2 sqrt(2)
            assert b / a == pytest.approx(2 ** -(hurst + 1), rel=1e-12)

    def test_hurst_monotone_high_k_fraction(self):
        g = sp.Grid(64)
        K = 31
        rng = np.random.default_rng(3)
        alphas = rng.uniform(-1, 1, (K, K, 2, 2))
        fields = {}
        for hurst in (0.25, 0.75):
            half = ics.assemble_brownian_bridge_half(g, hurst, alphas)
            full = sp.full_from_half(half[None])[0]
            f = sp.SpectralScalar(g, full)
            shells, e = shell_spectrum(sp.SpectralField(g, np.stack([full, np.zeros_like(full)])))
            total = e.sum()
            fields[hurst] = e[16:].sum() / total
        assert fields[0.75] < fields[0.25]

    def test_mean_mode_zero_and_divfree(self):
        g = sp.Grid(64)
        f = ics.fractional_brownian_bridge(g, ics.FbbParams(0.5), np.random.default_rng(0))
        assert np.all(f.coeffs[:, 0, 0] == 0)
        assert sp.divergence_sup(f) < 1e-12

    def test_shell_spectrum_slope(self):
        # ensemble-mean shell spectrum ~ k^{-(2H+1)}, slope within +-0.3
        hurst = 0.5
        g = sp.Grid(64)
        acc = np.zeros(33)
        n_samples = 200
        for s in range(n_samples):
            f = ics.fractional_brownian_bridge(
                g, ics.FbbParams(hurst), np.random.default_rng(5000 + s)
            )
            _, e = shell_spectrum(f)
            acc += e
        acc /= n_samples
        ks = np.arange(4, 17)
        slope = np.polyfit(np.log(ks), np.log(acc[4:17]), 1)[0]
        assert abs(slope - (-(2 * hurst + 1))) < 0.3

    def test_components_independent(self):
        g = sp.Grid(32)
        f = ics.fractional_brownian_bridge(g, ics.FbbParams(0.5), np.random.default_rng(1))
        # before projection components use independent draws; after projection
        # they are correlated by the projector but not identical
        assert not np.allclose(f.coeffs[0], f.coeffs[1])

    def test_invalid_hurst(self):
        with pytest.raises(sp.ConfigurationError):
            ics.FbbParams(1.5)


class TestTaylorGreen:
    def test_divergence_free_exactly(self):
        tg = ics.taylor_green(sp.Grid(32), 2.0)
        assert sp.divergence_sup(tg) == 0.0

    def test_energy(self):
        for a in (1.0, 1.3):
            tg = ics.taylor_green(sp.Grid(32), a)
            assert sp.l2_norm_sq(tg) == pytest.approx(a**2 / 2, rel=1e-14)

    def test_matches_trigonometric_formula(self):
        g = sp.Grid(32)
        tg = ics.taylor_green(g, 1.0)
        x = g.x
        X1, X2 = np.meshgrid(x, x, indexing="ij")
        expected = np.stack(
            [
                -np.cos(2 * np.pi * X1) * np.sin(2 * np.pi * X2),
                np.sin(2 * np.pi * X1) * np.cos(2 * np.pi * X2),
            ]
        )
        assert np.max(np.abs(sp.to_physical(tg).values - expected)) < 1e-14
