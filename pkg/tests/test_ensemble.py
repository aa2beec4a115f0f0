import numpy as np
import pytest

from stoch_euler import ensemble as en
from stoch_euler import storage


def small_spec(**kw) -> en.EnsembleSpec:
    base = dict(
        realizations=3,
        viscosities=(0.1 / 32,),
        grid_n=32,
        master_seed=5,
        ic={"type": "fbb", "hurst": 0.75},
        n_b=3,
        sigma=0.05,
        t_end=0.05,
        n_snapshots=3,
        sf_radii=(0.125, 0.25),
        aggregation_points=32,
    )
    base.update(kw)
    return en.EnsembleSpec(**base)


class TestAggregate:
    def test_two_values(self):
        mean, std, stderr = en.aggregate(np.array([[2.0], [4.0]]))
        assert mean[0] == 3.0
        assert std[0] == pytest.approx(np.sqrt(2.0), rel=1e-14)
        assert stderr[0] == pytest.approx(1.0, rel=1e-14)

    def test_identical_series(self):
        mean, std, stderr = en.aggregate(np.ones((5, 4)))
        assert np.all(std == 0) and np.all(stderr == 0)

    def test_single_series(self):
        mean, std, _ = en.aggregate(np.array([[1.0, 2.0]]))
        assert np.array_equal(mean, [1.0, 2.0])
        assert np.all(std == 0)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            en.aggregate(np.zeros((0, 4)))

    def test_monte_carlo_sanity(self):
        rng = np.random.default_rng(0)
        draws = rng.standard_normal((10000, 256))
        mean, _, stderr = en.aggregate(draws)
        frac_within = np.mean(np.abs(mean) <= 4 * stderr)
        assert frac_within >= 0.998


class TestSeeding:
    def test_master_seed_changes_everything(self):
        a = en.ic_rng(1, 0).standard_normal(4)
        b = en.ic_rng(2, 0).standard_normal(4)
        assert not np.allclose(a, b)

    def test_ic_shared_across_viscosities(self):
        spec = small_spec(viscosities=(1e-3, 2e-3))
        out0 = en.run_realization(spec, 0, 1)
        out1 = en.run_realization(spec, 1, 1)
        e0 = out0["trajectory"].records[0].energy
        e1 = out1["trajectory"].records[0].energy
        assert e0 == e1

    def test_common_noise_couples_paths(self):
        a = en.forcing_rng(5, 0, 3, common_noise=True).standard_normal(8)
        b = en.forcing_rng(5, 1, 3, common_noise=True).standard_normal(8)
        c = en.forcing_rng(5, 1, 3, common_noise=False).standard_normal(8)
        assert np.array_equal(a, b)
        assert not np.allclose(a, c)


class TestRunEnsemble:
    def test_single_realization_stats(self):
        spec = small_spec(realizations=1)
        stats = en.run_ensemble(spec)
        cell = stats.cells[0]
        assert cell.realizations == 1
        assert np.all(cell.stats["energy"][1] == 0)  # std

    def test_deterministic_ic_zero_noise(self):
        spec = small_spec(
            realizations=3, sigma=0.0, ic={"type": "taylor_green", "amplitude": 1.0}
        )
        stats = en.run_ensemble(spec)
        assert np.max(stats.cells[0].stats["energy"][1]) <= 1e-12

    def test_prefix_stable_in_realization_count(self, tmp_path):
        out3 = tmp_path / "r3"
        out4 = tmp_path / "r4"
        en.run_ensemble(small_spec(realizations=3), outdir=out3)
        en.run_ensemble(small_spec(realizations=4), outdir=out4)
        for ir in range(3):
            a = (out3 / storage.nu_dirname(0, 0.1 / 32) / f"real_{ir:03d}.csv").read_bytes()
            b = (out4 / storage.nu_dirname(0, 0.1 / 32) / f"real_{ir:03d}.csv").read_bytes()
            assert a == b

    def test_worker_schedule_independence(self, tmp_path):
        out1 = tmp_path / "w1"
        out2 = tmp_path / "w2"
        en.run_ensemble(small_spec(), outdir=out1, workers=1)
        en.run_ensemble(small_spec(), outdir=out2, workers=3)
        cell = storage.nu_dirname(0, 0.1 / 32)
        for ir in range(3):
            a = (out1 / cell / f"real_{ir:03d}.csv").read_bytes()
            b = (out2 / cell / f"real_{ir:03d}.csv").read_bytes()
            assert a == b

    def test_analyze_recomputes_identical_stats(self, tmp_path):
        stats = en.run_ensemble(small_spec(), outdir=tmp_path)
        again = en.analyze(tmp_path)
        for q in en.QUANTITIES:
            assert np.array_equal(stats.cells[0].stats[q][0], again.cells[0].stats[q][0])
            assert np.array_equal(stats.cells[0].stats[q][1], again.cells[0].stats[q][1])

    def test_analyze_idempotent_files(self, tmp_path):
        en.run_ensemble(small_spec(), outdir=tmp_path)
        mean_csv = tmp_path / storage.nu_dirname(0, 0.1 / 32) / "mean_diagnostics.csv"
        first = mean_csv.read_bytes()
        en.analyze(tmp_path)
        assert mean_csv.read_bytes() == first

    def test_balance_residual_reporting(self):
        spec = small_spec()
        stats = en.run_ensemble(spec)
        sbar = 9 * 0.05**2
        res, se = stats.balance_residual(sbar)
        assert res[0] == 0.0
        assert np.all(se >= 0)
        # loose sanity: measured input within 5 stderr of prediction at T
        assert abs(res[-1]) <= 5 * max(se[-1], 1e-6)

    def test_unstable_run_aborts_by_default(self):
        # dt far beyond the advective stability limit blows up quickly
        spec = small_spec(
            sigma=0.0,
            ic={"type": "fbb", "hurst": 0.25},
            dt=0.5,
            t_end=40.0,
            n_snapshots=0,
        )
        from stoch_euler.integrator import UnstableRunError

        with pytest.raises(UnstableRunError):
            en.run_ensemble(spec)

    def test_skip_failed_records_failures(self, tmp_path):
        spec = small_spec(
            sigma=0.0,
            ic={"type": "fbb", "hurst": 0.25},
            dt=0.5,
            t_end=40.0,
            n_snapshots=0,
        )
        stats = en.run_ensemble(spec, outdir=tmp_path, skip_failed=True)
        assert len(stats.failures) > 0
        manifest = storage.read_manifest(tmp_path / "manifest.json")
        assert manifest["failures"] == [list(f) for f in stats.failures]


class TestMeanCsvSchema:
    def test_three_columns_per_quantity(self, tmp_path):
        en.run_ensemble(small_spec(), outdir=tmp_path)
        cols = storage.read_csv_columns(
            tmp_path / storage.nu_dirname(0, 0.1 / 32) / "mean_diagnostics.csv"
        )
        for q in en.QUANTITIES:
            for suffix in ("mean", "std", "stderr"):
                assert f"{q}_{suffix}" in cols
        assert "input_pred" in cols
        assert "t" in cols

    def test_worker_count_env_fallback(self, monkeypatch):
        monkeypatch.delenv("STOCH_EULER_WORKERS", raising=False)
        assert en.worker_count(None) == 1
        assert en.worker_count(5) == 5
        monkeypatch.setenv("STOCH_EULER_WORKERS", "7")
        assert en.worker_count(None) == 7


class TestFileInitialCondition:
    def test_snapshot_roundtrip_as_ic(self, tmp_path):
        from stoch_euler import spectral as sp
        from stoch_euler.initial_conditions import taylor_green
        from stoch_euler.spectral import Grid, to_physical

        tg = taylor_green(Grid(32), 1.0)
        path = tmp_path / "ic.bin"
        storage.write_snapshot(path, to_physical(tg), 0.0)
        got = en.build_initial_condition(
            Grid(32), {"type": "file", "path": str(path)}, np.random.default_rng(0)
        )
        assert np.max(np.abs(got.coeffs - tg.coeffs)) < 1e-14

    def test_grid_mismatch_rejected(self, tmp_path):
        from stoch_euler.initial_conditions import taylor_green
        from stoch_euler.spectral import ConfigurationError, Grid, to_physical

        tg = taylor_green(Grid(32), 1.0)
        path = tmp_path / "ic.bin"
        storage.write_snapshot(path, to_physical(tg), 0.0)
        with pytest.raises(ConfigurationError):
            en.build_initial_condition(
                Grid(64), {"type": "file", "path": str(path)}, np.random.default_rng(0)
            )


class TestModulusReport:
    def test_written_when_radius_grid_supports_fit(self, tmp_path):
        spec = small_spec(sf_radii=(0.0625, 0.09375, 0.125, 0.1875, 0.25))
        en.run_ensemble(spec, outdir=tmp_path)
        cols = storage.read_csv_columns(tmp_path / "modulus.csv")
        assert set(cols) == {"nu", "exponent", "prefactor", "max_log_residual",
                             "sup_ratio_discrete"}
        assert len(cols["nu"]) == 1

    def test_skipped_for_short_radius_grid(self, tmp_path):
        en.run_ensemble(small_spec(), outdir=tmp_path)
        assert not (tmp_path / "modulus.csv").exists()
