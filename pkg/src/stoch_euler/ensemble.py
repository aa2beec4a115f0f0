"""Monte Carlo ensembles over (viscosity, realization) with reproducible seeding.

Seed derivation: every random stream is a numpy SeedSequence child of the
master seed with a fixed spawn key, so results do not depend on scheduling:

* initial condition of realization ir:  (1, 0, ir)   -- shared across nu
* forcing path of cell (inu, ir):       (2, inu + 1, ir)
* forcing path with common noise:       (2, 0, ir)   -- shared across nu

Realizations run in separate processes (embarrassingly parallel); aggregation
is a deterministic fold over sorted indices.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import storage
from .diagnostics import structure_function_table
from .forcing import ForcingBasis
from .initial_conditions import (
    FbbParams,
    VortexSheetParams,
    flat_vortex_sheet,
    fractional_brownian_bridge,
    taylor_green,
)
from .integrator import IntegratorConfig, UnstableRunError, run
from .spectral import ConfigurationError, Grid, SpectralField, leray_project, to_spectral

QUANTITIES = ("energy", "grad_sq", "enstrophy", "cum_dissipation", "input")


def default_sf_radii(n: int) -> list:
    """Geometric radius grid from 4 cells up to r = 0.25."""
    return list(np.geomspace(4.0 / n, 0.25, 12))


@dataclass(frozen=True)
class EnsembleSpec:
    realizations: int = 32
    viscosities: tuple = ()
    grid_n: int = 256
    master_seed: int = 0
    ic: dict = field(default_factory=dict)
    n_b: int = 9
    sigma: float = 0.0
    b_table: tuple | None = None
    t_end: float = 1.0
    sf_radii: tuple = ()
    sf_p: int = 2
    sf_normalization: str = "average"
    scheme: str = "imex_cn_em"
    dt: float | str = "auto"
    cfl: float = 0.4
    dt_max: float = 1e-2
    record_every: int = 1
    n_snapshots: int = 33
    dealias: str = "three_halves"
    project_every_step: bool = True
    common_noise: bool = False
    aggregation_points: int = 512
    save_snapshots: bool = False

    def __post_init__(self):
        if self.realizations < 1:
            raise ConfigurationError("realizations must be >= 1")
        if len(self.viscosities) == 0:
            object.__setattr__(
                self, "viscosities", (0.05 / self.grid_n, 0.1 / self.grid_n, 0.2 / self.grid_n)
            )
        if any(nu < 0 for nu in self.viscosities):
            raise ConfigurationError("viscosities must be >= 0")
        if len(self.sf_radii) == 0:
            object.__setattr__(self, "sf_radii", tuple(default_sf_radii(self.grid_n)))


@dataclass(eq=False)
class CellStats:
    """Aggregated statistics for one viscosity cell."""

    nu: float
    realizations: int
    times: np.ndarray
    stats: dict  # quantity -> (mean, std, stderr)
    sf_radii: np.ndarray
    sf_p: int
    sf_total: tuple  # (mean, std, stderr) of time-integrated S_p per radius


@dataclass(eq=False)
class EnsembleStats:
    spec: EnsembleSpec
    cells: list  # CellStats per viscosity
    failures: list = field(default_factory=list)

    def balance_residual(self, sigma_bar: float, cell_index: int = 0) -> tuple:
        """(residual, stderr) of measured-vs-predicted energy input over time."""
        cell = self.cells[cell_index]
        mean, _, stderr = cell.stats["input"]
        return mean - sigma_bar * cell.times, stderr


def ic_rng(master_seed: int, ir: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(master_seed, spawn_key=(1, 0, ir)))


def forcing_rng(master_seed: int, inu: int, ir: int, common_noise: bool) -> np.random.Generator:
    key = (2, 0, ir) if common_noise else (2, inu + 1, ir)
    return np.random.default_rng(np.random.SeedSequence(master_seed, spawn_key=key))


def build_initial_condition(grid: Grid, ic_spec: dict, rng: np.random.Generator) -> SpectralField:
    kind = ic_spec.get("type")
    if kind == "flat_vortex_sheet":
        params = VortexSheetParams(
            rho=ic_spec.get("rho", 0.1),
            delta=ic_spec.get("delta", 0.025),
            p_modes=ic_spec.get("p_modes", 10),
        )
        return flat_vortex_sheet(grid, params, rng)
    if kind == "fbb":
        return fractional_brownian_bridge(grid, FbbParams(ic_spec["hurst"]), rng)
    if kind == "taylor_green":
        return taylor_green(grid, ic_spec.get("amplitude", 1.0))
    if kind == "file":
        phys, _, _ = storage.read_snapshot(ic_spec["path"])
        if phys.grid.n != grid.n:
            raise ConfigurationError(
                f"snapshot grid {phys.grid.n} does not match configured n={grid.n}"
            )
        return leray_project(to_spectral(phys))
    raise ConfigurationError(f"unknown initial condition type {kind!r}")


def _basis(spec: EnsembleSpec, grid: Grid) -> ForcingBasis:
    b = None if spec.b_table is None else np.asarray(spec.b_table, dtype=float)
    return ForcingBasis(grid, spec.n_b, spec.sigma, b)


def run_realization(spec: EnsembleSpec, inu: int, ir: int) -> dict:
    """One (viscosity, realization) run; returns plain arrays for aggregation."""
    grid = Grid(spec.grid_n)
    nu = spec.viscosities[inu]
    ic_field = build_initial_condition(grid, spec.ic, ic_rng(spec.master_seed, ir))
    cfg = IntegratorConfig(
        nu=nu,
        t_end=spec.t_end,
        dt=spec.dt,
        scheme=spec.scheme,
        cfl=spec.cfl,
        dt_max=spec.dt_max,
        record_every=spec.record_every,
        n_snapshots=spec.n_snapshots,
        dealias=spec.dealias,
        project_every_step=spec.project_every_step,
    )
    basis = _basis(spec, grid)
    rng = forcing_rng(spec.master_seed, inu, ir, spec.common_noise)
    traj = run(grid, ic_field, cfg, basis, rng)
    table = None
    if spec.n_snapshots >= 2 and len(spec.sf_radii) > 0:
        table = structure_function_table(
            traj.snapshots, spec.sf_radii, spec.sf_p, spec.sf_normalization
        )
    return {"inu": inu, "ir": ir, "trajectory": traj, "sf": table}


def _worker(args) -> dict:
    spec, inu, ir = args
    try:
        out = run_realization(spec, inu, ir)
        out["trajectory"].snapshots = []  # consumed into sf; keep IPC payload small
        return out
    except UnstableRunError as exc:
        return {"inu": inu, "ir": ir, "unstable_at": exc.step_index}


def aggregate(values: np.ndarray) -> tuple:
    """Pointwise (mean, unbiased std, stderr) along the first axis."""
    values = np.asarray(values)
    if values.shape[0] == 0:
        raise ValueError("empty series collection")
    mean = values.mean(axis=0)
    if values.shape[0] == 1:
        std = np.zeros_like(mean)
    else:
        std = values.std(axis=0, ddof=1)
    return mean, std, std / np.sqrt(values.shape[0])


def _records_to_arrays(records: list) -> dict:
    t = np.array([r.t for r in records])
    energy = np.array([r.energy for r in records])
    return {
        "t": t,
        "energy": energy,
        "grad_sq": np.array([r.grad_sq for r in records]),
        "enstrophy": np.array([r.enstrophy for r in records]),
        "cum_dissipation": np.array([r.cumulative_dissipation for r in records]),
        "input": energy
        + np.array([r.cumulative_dissipation for r in records])
        - energy[0],
    }


def aggregate_cell(
    spec: EnsembleSpec, nu: float, record_arrays: list, sf_tables: list
) -> CellStats:
    """Interpolate realization series onto the common grid and aggregate."""
    grid_t = np.linspace(0.0, spec.t_end, spec.aggregation_points)
    stats = {}
    if not record_arrays:
        nan = np.full(spec.aggregation_points, np.nan)
        radii = np.asarray(spec.sf_radii)
        nanr = np.full(len(radii), np.nan)
        return CellStats(
            nu, 0, grid_t, {q: (nan, nan.copy(), nan.copy()) for q in QUANTITIES},
            radii, spec.sf_p, (nanr, nanr.copy(), nanr.copy()),
        )
    for q in QUANTITIES:
        stacked = np.stack(
            [np.interp(grid_t, arr["t"], arr[q]) for arr in record_arrays]
        )
        stats[q] = aggregate(stacked)
    radii = np.asarray(spec.sf_radii)
    if sf_tables and sf_tables[0] is not None:
        totals = np.stack([tab[1] for tab in sf_tables])
        sf_total = aggregate(totals)
    else:
        nanrow = np.full(len(radii), np.nan)
        sf_total = (nanrow, nanrow.copy(), nanrow.copy())
    return CellStats(
        nu, len(record_arrays), grid_t, stats, radii, spec.sf_p, sf_total
    )


def run_ensemble(
    spec: EnsembleSpec,
    outdir=None,
    workers: int = 1,
    skip_failed: bool = False,
) -> EnsembleStats:
    """Run the full (viscosity x realization) matrix and aggregate.

    With an output directory, every realization's diagnostics and
    structure-function table are persisted and the aggregation is recomputed
    from the persisted files (the same pass `analyze` runs standalone).
    """
    tasks = [
        (spec, inu, ir)
        for inu in range(len(spec.viscosities))
        for ir in range(spec.realizations)
    ]
    results = {}
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for out in pool.map(_worker, tasks, chunksize=1):
                results[(out["inu"], out["ir"])] = out
    else:
        for task in tasks:
            out = _worker(task)
            results[(out["inu"], out["ir"])] = out

    failures = sorted(k for k, v in results.items() if "unstable_at" in v)
    if failures and not skip_failed:
        inu, ir = failures[0]
        raise UnstableRunError(
            results[(inu, ir)]["unstable_at"],
        )

    if outdir is not None:
        outdir = Path(outdir)
        persist_raw(spec, results, outdir, failures, workers)
        return analyze(outdir)

    cells = []
    for inu, nu in enumerate(spec.viscosities):
        arrays, tables = [], []
        for ir in range(spec.realizations):
            out = results[(inu, ir)]
            if "unstable_at" in out:
                continue
            arrays.append(_records_to_arrays(out["trajectory"].records))
            tab = out["sf"]
            tables.append(None if tab is None else (tab.radii, tab.values_time_integrated))
        cells.append(aggregate_cell(spec, nu, arrays, tables))
    return EnsembleStats(spec, cells, [list(f) for f in failures])


def spec_manifest(spec: EnsembleSpec, workers: int, failures=()) -> dict:
    payload = {
        "kind": "stoch-euler ensemble",
        "spec": {
            **{
                k: (list(v) if isinstance(v, tuple) else v)
                for k, v in spec.__dict__.items()
            },
        },
        "seed_scheme": {
            "initial_condition": "SeedSequence(master_seed, spawn_key=(1, 0, realization))",
            "forcing": "SeedSequence(master_seed, spawn_key=(2, nu_index + 1, realization))",
            "forcing_common_noise": "SeedSequence(master_seed, spawn_key=(2, 0, realization))",
            "gaussians": "numpy Generator.standard_normal((n_b, n_b)) per step, row-major (i, j)",
        },
        "workers": workers,
        "failures": [list(f) for f in failures],
        "versions": {"numpy": np.__version__},
    }
    return payload


def persist_raw(spec: EnsembleSpec, results: dict, outdir: Path, failures, workers: int = 1) -> None:
    outdir.mkdir(parents=True, exist_ok=True)
    storage.write_manifest(outdir / "manifest.json", spec_manifest(spec, workers, failures))
    for inu, nu in enumerate(spec.viscosities):
        cell_dir = outdir / storage.nu_dirname(inu, nu)
        cell_dir.mkdir(exist_ok=True)
        for ir in range(spec.realizations):
            out = results[(inu, ir)]
            if "unstable_at" in out:
                continue
            diag_path, sf_path = storage.realization_paths(cell_dir, ir)
            storage.write_diagnostics_csv(diag_path, out["trajectory"].records)
            if out["sf"] is not None:
                storage.write_sf_csv(sf_path, out["sf"])


def analyze(outdir) -> EnsembleStats:
    """Recompute ensemble statistics from persisted raw outputs."""
    outdir = Path(outdir)
    manifest = storage.read_manifest(outdir / "manifest.json")
    raw = dict(manifest["spec"])
    for key in ("viscosities", "sf_radii"):
        raw[key] = tuple(raw[key])
    if raw.get("b_table") is not None:
        raw["b_table"] = tuple(map(tuple, raw["b_table"]))
    spec = EnsembleSpec(**raw)
    sigma_bar_val = float(np.sum(np.asarray(_basis_b(spec)) ** 2))

    cells = []
    for inu, nu in enumerate(spec.viscosities):
        cell_dir = outdir / storage.nu_dirname(inu, nu)
        arrays, tables = [], []
        for ir in range(spec.realizations):
            diag_path, sf_path = storage.realization_paths(cell_dir, ir)
            if not diag_path.exists():
                continue
            records = storage.read_diagnostics_csv(diag_path)
            arrays.append(_records_to_arrays(records))
            if sf_path.exists():
                _, radii, p, _, total = storage.read_sf_csv(sf_path)
                tables.append((radii, total))
            else:
                tables.append(None)
        cell = aggregate_cell(spec, nu, arrays, tables)
        cells.append(cell)
        extra = {"input_pred": sigma_bar_val * cell.times}
        storage.write_mean_csv(
            cell_dir / "mean_diagnostics.csv", cell.times, cell.stats, extra
        )
        if tables and tables[0] is not None and cell.realizations > 0:
            _write_mean_sf(cell_dir / "mean_sf.csv", cell)
    _write_modulus_report(outdir, cells)
    return EnsembleStats(spec, cells, manifest.get("failures", []))


def _write_modulus_report(outdir: Path, cells: list) -> None:
    """Power-law fit of each cell's mean time-integrated structure function,
    plus the sup over the discrete radius grid of S_p^T(r) / r^exponent.

    The sup is reported over the available radii only (the continuum sup is
    not computable); uniformity of these numbers across viscosities is the
    modulus-of-continuity condition the ensembles probe.
    """
    from .diagnostics import fit_modulus

    rows = []
    for cell in cells:
        mean = cell.sf_total[0]
        if (
            cell.realizations == 0
            or len(cell.sf_radii) < 4
            or np.any(~np.isfinite(mean))
            or np.any(mean <= 0)
        ):
            continue
        fit = fit_modulus(cell.sf_radii, mean)
        sup_ratio = float(np.max(mean / cell.sf_radii**fit.exponent))
        rows.append((cell.nu, fit.exponent, fit.prefactor, fit.residual, sup_ratio))
    if not rows:
        return
    import csv as _csv

    with open(outdir / "modulus.csv", "w", newline="") as fh:
        w = _csv.writer(fh)
        w.writerow(["nu", "exponent", "prefactor", "max_log_residual", "sup_ratio_discrete"])
        for row in rows:
            w.writerow([format(x, ".17g") for x in row])


def _basis_b(spec: EnsembleSpec) -> np.ndarray:
    if spec.b_table is not None:
        return np.asarray(spec.b_table, dtype=float)
    return np.full((spec.n_b, spec.n_b), spec.sigma)


def _write_mean_sf(path, cell: CellStats) -> None:
    mean, std, stderr = cell.sf_total
    import csv as _csv

    with open(path, "w", newline="") as fh:
        w = _csv.writer(fh)
        w.writerow(["r", "p", "sft_mean", "sft_std", "sft_stderr"])
        for i, r in enumerate(cell.sf_radii):
            w.writerow(
                [
                    format(float(r), ".17g"),
                    str(cell.sf_p),
                    format(float(mean[i]), ".17g"),
                    format(float(std[i]), ".17g"),
                    format(float(stderr[i]), ".17g"),
                ]
            )


def worker_count(requested: int | None) -> int:
    if requested is not None and requested > 0:
        return requested
    env = os.environ.get("STOCH_EULER_WORKERS")
    if env:
        return max(1, int(env))
    return 1
