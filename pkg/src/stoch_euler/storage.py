"""File formats: diagnostics CSV, structure-function CSV, snapshots, manifest.

All floats are written with repr-exact precision (%.17g) so a read/write
round-trip reproduces the binary values, and rewriting the same data gives
byte-identical files.
"""

from __future__ import annotations

import csv
import json
import struct
from pathlib import Path

import numpy as np

from .integrator import DiagnosticsRecord
from .spectral import Grid, PhysicalField

DIAG_HEADER = ["t", "energy", "grad_sq", "enstrophy", "cum_dissipation",
               "noise_input_theoretical"]
SF_HEADER = ["t_or_total", "r", "p", "value"]

SNAPSHOT_MAGIC = b"SEFIELD1"
SNAPSHOT_VERSION = 1
_SNAP_HEADER = struct.Struct("<8sII16sd2s")  # magic, version, n, kind, t, endian


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_diagnostics_csv(path, records: list) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(DIAG_HEADER)
        for r in records:
            w.writerow(
                [
                    _fmt(r.t),
                    _fmt(r.energy),
                    _fmt(r.grad_sq),
                    _fmt(r.enstrophy),
                    _fmt(r.cumulative_dissipation),
                    _fmt(r.noise_input_theoretical),
                ]
            )


def read_diagnostics_csv(path) -> list:
    records = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != DIAG_HEADER:
            raise ValueError(f"{path}: unexpected header {header}")
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(DIAG_HEADER):
                raise ValueError(f"{path}:{lineno}: expected {len(DIAG_HEADER)} fields")
            try:
                vals = [float(x) for x in row]
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from None
            records.append(DiagnosticsRecord(*vals))
    return records


def write_sf_csv(path, table) -> None:
    """Structure-function table rows: one per (snapshot time, radius) plus a
    'total' row per radius for the time-integrated value."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(SF_HEADER)
        for it, t in enumerate(table.times):
            for ir, r in enumerate(table.radii):
                w.writerow([_fmt(t), _fmt(r), str(table.p), _fmt(table.values_snapshot[it, ir])])
        for ir, r in enumerate(table.radii):
            w.writerow(["total", _fmt(r), str(table.p), _fmt(table.values_time_integrated[ir])])


def read_sf_csv(path):
    """Returns (times, radii, p, snapshot values, time-integrated values)."""
    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != SF_HEADER:
            raise ValueError(f"{path}: unexpected header {header}")
        for lineno, row in enumerate(reader, start=2):
            if len(row) != 4:
                raise ValueError(f"{path}:{lineno}: expected 4 fields")
            rows.append(row)
    times = sorted({float(r[0]) for r in rows if r[0] != "total"})
    radii = sorted({float(r[1]) for r in rows})
    p = int(rows[0][2])
    t_index = {t: i for i, t in enumerate(times)}
    r_index = {r: i for i, r in enumerate(radii)}
    snap = np.full((len(times), len(radii)), np.nan)
    total = np.full(len(radii), np.nan)
    for row in rows:
        ir = r_index[float(row[1])]
        if row[0] == "total":
            total[ir] = float(row[3])
        else:
            snap[t_index[float(row[0])], ir] = float(row[3])
    return np.array(times), np.array(radii), p, snap, total


def write_mean_csv(path, times: np.ndarray, stats: dict, extra: dict | None = None) -> None:
    """Per-quantity mean/std/stderr columns on the aggregation time grid."""
    cols = ["t"]
    arrays = [np.asarray(times)]
    for name, (mean, std, stderr) in stats.items():
        cols += [f"{name}_mean", f"{name}_std", f"{name}_stderr"]
        arrays += [mean, std, stderr]
    for name, arr in (extra or {}).items():
        cols.append(name)
        arrays.append(arr)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(cols)
        for i in range(len(arrays[0])):
            w.writerow([_fmt(a[i]) for a in arrays])


def read_csv_columns(path) -> dict:
    """Generic reader: header-keyed float columns."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        data = {h: [] for h in header}
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise ValueError(f"{path}:{lineno}: expected {len(header)} fields")
            for h, x in zip(header, row):
                data[h].append(float(x))
    return {h: np.array(v) for h, v in data.items()}


def write_snapshot(path, field: PhysicalField, t: float, kind: str = "velocity") -> None:
    kind_b = kind.encode()[:16].ljust(16, b"\0")
    header = _SNAP_HEADER.pack(
        SNAPSHOT_MAGIC, SNAPSHOT_VERSION, field.grid.n, kind_b, float(t), b"LE"
    )
    payload = np.ascontiguousarray(field.values, dtype="<f8").tobytes()
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(payload)


def read_snapshot(path) -> tuple:
    """Returns (PhysicalField, t, kind)."""
    with open(path, "rb") as fh:
        header = fh.read(_SNAP_HEADER.size)
        magic, version, n, kind_b, t, endian = _SNAP_HEADER.unpack(header)
        if magic != SNAPSHOT_MAGIC:
            raise ValueError(f"{path}: not a snapshot file")
        if version != SNAPSHOT_VERSION:
            raise ValueError(f"{path}: unsupported version {version}")
        if endian != b"LE":
            raise ValueError(f"{path}: unsupported endianness tag {endian!r}")
        payload = np.frombuffer(fh.read(2 * n * n * 8), dtype="<f8")
    values = payload.reshape(2, n, n).astype(np.float64)
    return PhysicalField(Grid(int(n)), values), float(t), kind_b.rstrip(b"\0").decode()


def write_manifest(path, payload: dict) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_manifest(path) -> dict:
    with open(path) as fh:
        return json.load(fh)


def nu_dirname(index: int, nu: float) -> str:
    return f"nu_{index}_{format(nu, '.12g')}"


def realization_paths(cell_dir: Path, ir: int) -> tuple:
    return (
        cell_dir / f"real_{ir:03d}.csv",
        cell_dir / f"real_{ir:03d}_sf.csv",
    )
