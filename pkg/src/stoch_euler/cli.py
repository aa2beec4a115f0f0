"""Command line interface: run | ensemble | analyze | verify."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import storage
from .config import ConfigError, parse_config
from .diagnostics import dissipation_integral
from dataclasses import replace

from .ensemble import (
    EnsembleStats,
    analyze,
    run_ensemble,
    run_realization,
    spec_manifest,
    worker_count,
)
from .integrator import UnstableRunError
from .spectral import to_physical
from .verify import run_battery


def _add_common_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=str, default=None, help="YAML configuration file")
    p.add_argument("--seed", type=int, default=None, help="master seed override")
    p.add_argument("--nu", type=str, default=None,
                   help="viscosity override (number or '0.05/N')")
    p.add_argument("--sigma", type=float, default=None, help="forcing coefficient")
    p.add_argument("--n", type=int, default=None, help="grid size override")
    p.add_argument("--tend", type=float, default=None, help="horizon override")
    p.add_argument("--realizations", type=int, default=None)
    p.add_argument("--workers", type=int, default=None,
                   help="parallel realizations (env STOCH_EULER_WORKERS as fallback)")
    p.add_argument("--common-noise", action="store_true", default=None,
                   help="reuse Brownian paths across viscosities")
    p.add_argument("--skip-failed", action="store_true",
                   help="continue the ensemble past unstable realizations")
    p.add_argument("--sf-normalization", choices=("average", "integral"), default=None)
    p.add_argument("--project-every-step", type=_bool_flag, default=None,
                   metavar="{true,false}")
    p.add_argument("--dry-run", action="store_true",
                   help="print the run matrix and seeds, execute nothing")
    p.add_argument("--out", type=str, default=None, help="output directory override")


def _bool_flag(text: str) -> bool:
    low = text.strip().lower()
    if low in ("true", "1", "yes"):
        return True
    if low in ("false", "0", "no"):
        return False
    raise argparse.ArgumentTypeError(f"expected true/false, got {text!r}")


def _config_from_args(args):
    overrides = {
        "ensemble.master_seed": args.seed,
        "forcing.sigma": args.sigma,
        "grid.n": args.n,
        "integrator.t_end": args.tend,
        "ensemble.realizations": args.realizations,
        "ensemble.workers": args.workers,
        "ensemble.common_noise": args.common_noise,
        "output.sf_normalization": args.sf_normalization,
        "integrator.project_every_step": args.project_every_step,
        "output.directory": args.out,
    }
    if args.nu is not None:
        overrides["ensemble.viscosities"] = [args.nu]
    return parse_config(args.config, overrides)


def _print_matrix(spec, workers: int) -> None:
    print(f"grid n={spec.grid_n}  t_end={spec.t_end}  scheme={spec.scheme}  "
          f"sigma={spec.sigma}  N_b={spec.n_b}  workers={workers}")
    print(f"master_seed={spec.master_seed}  common_noise={spec.common_noise}")
    for inu, nu in enumerate(spec.viscosities):
        for ir in range(spec.realizations):
            key = (2, 0, ir) if spec.common_noise else (2, inu + 1, ir)
            print(f"  nu[{inu}]={nu:.6g}  realization={ir}  "
                  f"ic_key=(1, 0, {ir})  forcing_key={key}")


def cmd_run(args) -> int:
    cfg = _config_from_args(args)
    spec = cfg.to_ensemble_spec()
    workers = worker_count(cfg.workers)
    if args.dry_run:
        _print_matrix(replace(spec, realizations=1), workers)
        return 0
    outdir = Path(cfg.directory)
    outdir.mkdir(parents=True, exist_ok=True)
    out = run_realization(spec, 0, 0)
    traj = out["trajectory"]
    storage.write_manifest(outdir / "manifest.json", spec_manifest(spec, workers))
    storage.write_diagnostics_csv(outdir / "diagnostics.csv", traj.records)
    if out["sf"] is not None:
        storage.write_sf_csv(outdir / "structure_function.csv", out["sf"])
    if cfg.save_snapshots:
        for i, (t, snap) in enumerate(traj.snapshots):
            storage.write_snapshot(outdir / f"snapshot_{i:03d}.bin", to_physical(snap), t)
    total = dissipation_integral(
        traj.step_times, traj.grad_sq_series, spec.viscosities[0], spec.t_end, cfg.n_rect
    )
    rec = traj.records[-1]
    print(f"final t={rec.t:.6g} energy={rec.energy:.6g} "
          f"cum_dissipation={rec.cumulative_dissipation:.6g} "
          f"riemann_dissipation={total:.6g}")
    print(f"wrote {outdir}/diagnostics.csv")
    return 0


def cmd_ensemble(args) -> int:
    cfg = _config_from_args(args)
    spec = cfg.to_ensemble_spec()
    workers = worker_count(cfg.workers)
    if args.dry_run:
        _print_matrix(spec, workers)
        return 0
    outdir = Path(cfg.directory)
    try:
        stats = run_ensemble(spec, outdir=outdir, workers=workers,
                             skip_failed=args.skip_failed)
    except UnstableRunError as exc:
        print(f"ensemble aborted: {exc}", file=sys.stderr)
        return 1
    _report(stats)
    print(f"wrote raw + analysis outputs under {outdir}/")
    return 0


def cmd_analyze(args) -> int:
    cfg_dir = args.outdir
    stats = analyze(cfg_dir)
    _report(stats)
    print(f"rewrote analysis outputs under {cfg_dir}/")
    return 0


def _report(stats: EnsembleStats) -> None:
    sigma_bar = float(np.sum(np.square(
        stats.spec.b_table if stats.spec.b_table is not None
        else np.full((stats.spec.n_b, stats.spec.n_b), stats.spec.sigma))))
    for i, cell in enumerate(stats.cells):
        res, se = stats.balance_residual(sigma_bar, i)
        print(f"nu={cell.nu:.6g}: R={cell.realizations}  "
              f"final mean energy={cell.stats['energy'][0][-1]:.6g}  "
              f"balance residual at T={res[-1]:+.4g} (stderr {se[-1]:.4g})")
    if stats.failures:
        print(f"failed realizations: {stats.failures}")


def cmd_verify(_args) -> int:
    return 0 if run_battery() else 1


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="stoch-euler",
        description="Pseudo-spectral 2D stochastic Navier-Stokes simulator "
                    "with energy-balance and structure-function diagnostics",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="single realization")
    _add_common_flags(p_run)
    p_run.set_defaults(func=cmd_run)

    p_ens = sub.add_parser("ensemble", help="full (viscosity x realization) matrix")
    _add_common_flags(p_ens)
    p_ens.set_defaults(func=cmd_ensemble)

    p_an = sub.add_parser("analyze", help="recompute statistics from raw outputs")
    p_an.add_argument("outdir", type=str)
    p_an.set_defaults(func=cmd_analyze)

    p_ver = sub.add_parser("verify", help="run the analytic self-check battery")
    p_ver.set_defaults(func=cmd_verify)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(str(exc), file=sys.stderr)
        return 2
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
