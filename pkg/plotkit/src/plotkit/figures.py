"""Render the four-panel ensemble figure.

Panels, left to right (fixed order): time-integrated second-order structure
function, measured vs predicted energy input, total kinetic energy, and the
gradient norm driving the viscous dissipation. One curve per viscosity with
a shaded +-1 band (std or stderr).
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .reader import AnalysisData, load_analysis

PANELS = ("S2T", "Bt", "E", "grad_L2")

_PANEL_TITLES = {
    "S2T": "time-integrated structure function",
    "Bt": "energy input: measured vs predicted",
    "E": "total kinetic energy",
    "grad_L2": "squared gradient norm",
}

_COLORS = ("tab:blue", "tab:orange", "tab:green", "tab:red", "tab:purple")


@dataclass
class FigureSpec:
    input_dir: str
    output_path: str
    band: str = "std"
    panels: tuple = PANELS
    nu_labels: list | None = None
    dpi: int = 100

    def __post_init__(self):
        if self.band not in ("std", "stderr"):
            raise ValueError(f"band must be 'std' or 'stderr', got {self.band!r}")
        if tuple(self.panels) != PANELS:
            raise ValueError(f"panel order is fixed to {PANELS}")


def _band_bounds(cols: dict, name: str, band: str):
    mean = cols[f"{name}_mean"]
    width = cols[f"{name}_{band}"]
    return mean, mean - width, mean + width


def render_figure(spec: FigureSpec, data: AnalysisData | None = None) -> str:
    """Write the figure to spec.output_path; returns the path."""
    if data is None:
        data = load_analysis(spec.input_dir)
    labels = spec.nu_labels or [f"nu={cell.nu:.4g}" for cell in data.cells]

    fig, axes = plt.subplots(1, 4, figsize=(16.0, 3.6))
    ax_sft, ax_bt, ax_e, ax_g = axes

    for i, cell in enumerate(data.cells):
        color = _COLORS[i % len(_COLORS)]
        t = cell.diagnostics["t"]
        if cell.sf is not None:
            r = cell.sf["r"]
            mean, lo, hi = _band_bounds(cell.sf, "sft", spec.band)
            ax_sft.plot(r, mean, color=color, label=labels[i])
            ax_sft.fill_between(r, lo, hi, color=color, alpha=0.25, linewidth=0)
        mean, lo, hi = _band_bounds(cell.diagnostics, "input", spec.band)
        ax_bt.plot(t, mean, color=color, label=labels[i])
        ax_bt.fill_between(t, lo, hi, color=color, alpha=0.25, linewidth=0)
        mean, lo, hi = _band_bounds(cell.diagnostics, "energy", spec.band)
        ax_e.plot(t, mean, color=color, label=labels[i])
        ax_e.fill_between(t, lo, hi, color=color, alpha=0.25, linewidth=0)
        mean, lo, hi = _band_bounds(cell.diagnostics, "grad_sq", spec.band)
        ax_g.plot(t, mean, color=color, label=labels[i])
        ax_g.fill_between(t, lo, hi, color=color, alpha=0.25, linewidth=0)

    # predicted input line (identical across cells; plot once)
    first = data.cells[0].diagnostics
    ax_bt.plot(
        first["t"], first["input_pred"], "k--", linewidth=1.2, label="predicted"
    )

    if any(cell.sf is not None for cell in data.cells):
        ax_sft.set_xscale("log")
        ax_sft.set_yscale("log")
    ax_sft.set_xlabel("r")
    for ax, name in zip(axes, spec.panels):
        ax.set_title(_PANEL_TITLES[name], fontsize=10)
        if name != "S2T":
            ax.set_xlabel("t")
        if ax.get_legend_handles_labels()[0]:
            ax.legend(fontsize=7, loc="best")

    fig.tight_layout()
    out = Path(spec.output_path)
    out.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out, dpi=spec.dpi)
    plt.close(fig)
    return str(out)
