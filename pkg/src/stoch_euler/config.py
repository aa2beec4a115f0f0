"""YAML run configuration: defaults, validation, and flag overrides.

Validation collects every problem (unknown keys, missing keys, bad values)
and reports them together. Viscosities accept either numbers or strings of
the form ``"0.05/N"`` resolved against the grid size.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import yaml

from .ensemble import EnsembleSpec, default_sf_radii


class ConfigError(ValueError):
    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("invalid configuration:\n  " + "\n  ".join(self.problems))


_SCHEMA = {
    "grid": {"n"},
    "forcing": {"sigma", "n_b", "b"},
    "initial_condition": {"type", "rho", "delta", "p_modes", "hurst", "amplitude", "path"},
    "integrator": {
        "scheme", "dt", "cfl", "dt_max", "t_end", "record_every",
        "dealias", "project_every_step",
    },
    "ensemble": {
        "realizations", "viscosities", "master_seed", "common_noise",
        "workers", "aggregation_points",
    },
    "output": {
        "directory", "n_rect", "sf_radii", "sf_p", "sf_normalization",
        "n_snapshots", "save_snapshots",
    },
}

_IC_TYPES = ("flat_vortex_sheet", "fbb", "taylor_green", "file")


@dataclass
class RunConfig:
    grid_n: int = 256
    sigma: float | None = None
    n_b: int = 9
    b_table: list | None = None
    ic: dict = field(default_factory=lambda: {"type": "fbb", "hurst": 0.75})
    scheme: str = "imex_cn_em"
    dt: float | str = "auto"
    cfl: float = 0.4
    dt_max: float = 1e-2
    t_end: float = 1.0
    record_every: int = 1
    dealias: str = "three_halves"
    project_every_step: bool = True
    realizations: int = 32
    viscosities: list = field(default_factory=lambda: ["0.05/N", "0.1/N", "0.2/N"])
    master_seed: int = 0
    common_noise: bool = False
    workers: int | None = None
    aggregation_points: int = 512
    directory: str = "out"
    n_rect: int = 10000
    sf_radii: list | None = None
    sf_p: int = 2
    sf_normalization: str = "average"
    n_snapshots: int = 33
    save_snapshots: bool = False

    def resolved_viscosities(self) -> list:
        out = []
        for v in self.viscosities:
            out.append(resolve_viscosity(v, self.grid_n))
        return out

    def to_ensemble_spec(self) -> EnsembleSpec:
        return EnsembleSpec(
            realizations=self.realizations,
            viscosities=tuple(self.resolved_viscosities()),
            grid_n=self.grid_n,
            master_seed=self.master_seed,
            ic=dict(self.ic),
            n_b=self.n_b,
            sigma=self.sigma,
            b_table=None if self.b_table is None else tuple(map(tuple, self.b_table)),
            t_end=self.t_end,
            sf_radii=tuple(self.sf_radii if self.sf_radii is not None else default_sf_radii(self.grid_n)),
            sf_p=self.sf_p,
            sf_normalization=self.sf_normalization,
            scheme=self.scheme,
            dt=self.dt,
            cfl=self.cfl,
            dt_max=self.dt_max,
            record_every=self.record_every,
            n_snapshots=self.n_snapshots,
            dealias=self.dealias,
            project_every_step=self.project_every_step,
            common_noise=self.common_noise,
            aggregation_points=self.aggregation_points,
        )


def resolve_viscosity(value, grid_n: int) -> float:
    """Accept a number or an expression like '0.05/N' (N = grid size)."""
    if isinstance(value, (int, float)):
        return float(value)
    text = str(value).strip()
    if "/" in text:
        num, den = text.split("/", 1)
        if den.strip().lower() in ("n", str(grid_n)):
            return float(num) / grid_n
    try:
        return float(text)
    except ValueError:
        raise ValueError(f"cannot parse viscosity {value!r}") from None


def parse_config(path=None, overrides: dict | None = None) -> RunConfig:
    """Load, default, override, and validate a configuration.

    ``overrides`` maps dotted keys (e.g. 'forcing.sigma') to values; they win
    over file contents.
    """
    data = {}
    if path is not None:
        with open(path) as fh:
            data = yaml.safe_load(fh) or {}
        if not isinstance(data, dict):
            raise ConfigError([f"{path}: top level must be a mapping"])

    problems = []
    for section, keys in data.items():
        if section not in _SCHEMA:
            problems.append(f"unknown section {section!r}")
            continue
        if keys is None:
            continue
        if not isinstance(keys, dict):
            problems.append(f"section {section!r} must be a mapping")
            continue
        for key in keys:
            if key not in _SCHEMA[section]:
                problems.append(f"unknown key {section}.{key}")

    for dotted, value in (overrides or {}).items():
        if value is None:
            continue
        section, key = dotted.split(".", 1)
        data.setdefault(section, {})
        if not isinstance(data[section], dict):
            data[section] = {}
        data[section][key] = value

    def get(section, key, default):
        sec = data.get(section) or {}
        return sec.get(key, default)

    cfg = RunConfig()
    cfg.grid_n = get("grid", "n", cfg.grid_n)
    cfg.sigma = get("forcing", "sigma", None)
    cfg.n_b = get("forcing", "n_b", cfg.n_b)
    cfg.b_table = get("forcing", "b", None)
    ic = data.get("initial_condition")
    if ic:
        cfg.ic = dict(ic)
    cfg.scheme = get("integrator", "scheme", cfg.scheme)
    cfg.dt = get("integrator", "dt", cfg.dt)
    cfg.cfl = get("integrator", "cfl", cfg.cfl)
    cfg.dt_max = get("integrator", "dt_max", cfg.dt_max)
    cfg.t_end = get("integrator", "t_end", cfg.t_end)
    cfg.record_every = get("integrator", "record_every", cfg.record_every)
    cfg.dealias = get("integrator", "dealias", cfg.dealias)
    cfg.project_every_step = get("integrator", "project_every_step", cfg.project_every_step)
    cfg.realizations = get("ensemble", "realizations", cfg.realizations)
    cfg.viscosities = get("ensemble", "viscosities", cfg.viscosities)
    if not isinstance(cfg.viscosities, (list, tuple)):
        cfg.viscosities = [cfg.viscosities]
    cfg.master_seed = get("ensemble", "master_seed", cfg.master_seed)
    cfg.common_noise = get("ensemble", "common_noise", cfg.common_noise)
    cfg.workers = get("ensemble", "workers", cfg.workers)
    cfg.aggregation_points = get("ensemble", "aggregation_points", cfg.aggregation_points)
    cfg.directory = get("output", "directory", cfg.directory)
    cfg.n_rect = get("output", "n_rect", cfg.n_rect)
    cfg.sf_radii = get("output", "sf_radii", cfg.sf_radii)
    cfg.sf_p = get("output", "sf_p", cfg.sf_p)
    cfg.sf_normalization = get("output", "sf_normalization", cfg.sf_normalization)
    cfg.n_snapshots = get("output", "n_snapshots", cfg.n_snapshots)
    cfg.save_snapshots = get("output", "save_snapshots", cfg.save_snapshots)

    problems.extend(_validate(cfg))
    if problems:
        raise ConfigError(problems)
    return cfg


def _validate(cfg: RunConfig) -> list:
    problems = []
    if not isinstance(cfg.grid_n, int) or cfg.grid_n < 8 or cfg.grid_n % 2:
        problems.append(f"grid.n must be an even integer >= 8, got {cfg.grid_n!r}")
    if cfg.sigma is None:
        problems.append("missing required key forcing.sigma")
    elif not isinstance(cfg.sigma, (int, float)) or cfg.sigma < 0:
        problems.append(f"forcing.sigma must be a number >= 0, got {cfg.sigma!r}")
    if not isinstance(cfg.n_b, int) or cfg.n_b < 1:
        problems.append(f"forcing.n_b must be a positive integer, got {cfg.n_b!r}")
    elif isinstance(cfg.grid_n, int) and 2 * cfg.n_b > cfg.grid_n // 2:
        problems.append(
            f"forcing.n_b={cfg.n_b} unrepresentable on grid.n={cfg.grid_n}"
        )
    if cfg.b_table is not None:
        arr = np.asarray(cfg.b_table, dtype=float)
        if arr.shape != (cfg.n_b, cfg.n_b):
            problems.append(
                f"forcing.b must be an n_b x n_b table, got shape {arr.shape}"
            )
    kind = cfg.ic.get("type")
    if kind not in _IC_TYPES:
        problems.append(
            f"initial_condition.type must be one of {_IC_TYPES}, got {kind!r}"
        )
    elif kind == "fbb":
        h = cfg.ic.get("hurst")
        if not isinstance(h, (int, float)) or not 0 < h < 1:
            problems.append(f"initial_condition.hurst must be in (0,1), got {h!r}")
    elif kind == "file" and not cfg.ic.get("path"):
        problems.append("initial_condition.path required for type 'file'")
    elif kind == "flat_vortex_sheet":
        if cfg.ic.get("rho", 0.1) <= 0:
            problems.append("initial_condition.rho must be positive")
        if cfg.ic.get("delta", 0.025) < 0:
            problems.append("initial_condition.delta must be >= 0")
    if cfg.scheme not in ("euler_maruyama", "imex_cn_em"):
        problems.append(f"integrator.scheme unknown: {cfg.scheme!r}")
    if cfg.dealias not in ("none", "two_thirds", "three_halves"):
        problems.append(f"integrator.dealias unknown: {cfg.dealias!r}")
    if not (isinstance(cfg.dt, (int, float)) and cfg.dt > 0) and cfg.dt != "auto":
        problems.append(f"integrator.dt must be positive or 'auto', got {cfg.dt!r}")
    if not isinstance(cfg.cfl, (int, float)) or not 0 < cfg.cfl <= 1:
        problems.append(f"integrator.cfl must be in (0,1], got {cfg.cfl!r}")
    if not isinstance(cfg.t_end, (int, float)) or cfg.t_end < 0:
        problems.append(f"integrator.t_end must be >= 0, got {cfg.t_end!r}")
    if not isinstance(cfg.realizations, int) or cfg.realizations < 1:
        problems.append(f"ensemble.realizations must be >= 1, got {cfg.realizations!r}")
    if not isinstance(cfg.master_seed, int):
        problems.append(f"ensemble.master_seed must be an integer, got {cfg.master_seed!r}")
    for v in cfg.viscosities:
        try:
            nu = resolve_viscosity(v, cfg.grid_n if isinstance(cfg.grid_n, int) else 256)
            if nu < 0:
                problems.append(f"viscosity must be >= 0, got {v!r}")
        except ValueError as exc:
            problems.append(str(exc))
    if cfg.sf_radii is not None:
        for r in cfg.sf_radii:
            if not isinstance(r, (int, float)) or not 0 < r <= np.sqrt(2) / 2:
                problems.append(f"output.sf_radii entries must be in (0, sqrt(2)/2], got {r!r}")
    if cfg.sf_normalization not in ("average", "integral"):
        problems.append(
            f"output.sf_normalization must be 'average' or 'integral', got {cfg.sf_normalization!r}"
        )
    if not isinstance(cfg.n_rect, int) or cfg.n_rect < 1:
        problems.append(f"output.n_rect must be a positive integer, got {cfg.n_rect!r}")
    return problems
