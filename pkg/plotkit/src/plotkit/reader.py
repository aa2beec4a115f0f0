"""Load analyze-directory outputs (manifest + per-viscosity mean CSVs).

plotkit is a pure view over these files: it never recomputes physics, so
byte-identical inputs give identical figures.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np


class MissingInputError(FileNotFoundError):
    """Lists every absent file the figure would need."""

    def __init__(self, paths):
        self.paths = [str(p) for p in paths]
        super().__init__("missing input files:\n  " + "\n  ".join(self.paths))


@dataclass
class CellData:
    nu: float
    diagnostics: dict  # column name -> array
    sf: dict | None    # column name -> array, or None if absent


@dataclass
class AnalysisData:
    directory: Path
    cells: list  # CellData, ordered by viscosity index


def _read_columns(path: Path) -> dict:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        cols = {h: [] for h in header}
        for row in reader:
            for h, x in zip(header, row):
                cols[h].append(float(x))
    return {h: np.array(v) for h, v in cols.items()}


def load_analysis(directory) -> AnalysisData:
    directory = Path(directory)
    manifest_path = directory / "manifest.json"
    if not manifest_path.exists():
        raise MissingInputError([manifest_path])
    with open(manifest_path) as fh:
        manifest = json.load(fh)
    viscosities = manifest["spec"]["viscosities"]

    missing = []
    cells = []
    for inu, nu in enumerate(viscosities):
        cell_dir = directory / f"nu_{inu}_{format(nu, '.12g')}"
        diag_path = cell_dir / "mean_diagnostics.csv"
        sf_path = cell_dir / "mean_sf.csv"
        if not diag_path.exists():
            missing.append(diag_path)
            continue
        diagnostics = _read_columns(diag_path)
        sf = _read_columns(sf_path) if sf_path.exists() else None
        cells.append(CellData(float(nu), diagnostics, sf))
    if missing:
        raise MissingInputError(missing)
    return AnalysisData(directory, cells)
