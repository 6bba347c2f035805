"""File-output matplotlib rendering for scans, spectra, and spacing stats."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .analysis import ScanSeries, SpacingStats
from .solver import Spectrum

__all__ = ["render_scan", "render_spectrum", "render_spacing"]


def render_scan(series: ScanSeries, path: str, clip: float = 25.0) -> str:
    """Plot F over the scan range with poles as dashed verticals.

    Values are clipped to +-clip so pole flanks do not flatten the
    zero crossings; masked samples break the line naturally via NaN.
    """
    fig, ax = plt.subplots(figsize=(8, 4.5))
    vals = np.clip(series.values, -clip, clip)
    ax.plot(series.t, vals, lw=1.0, color="tab:blue")
    for p in series.poles:
        ax.axvline(p, color="tab:red", ls="--", lw=0.8)
    ax.axhline(0.0, color="k", lw=0.6)
    ax.set_xlabel(series.variable)
    ax.set_ylabel("F")
    ax.set_title(f"F scan ({series.label})")
    ax.set_ylim(-clip * 1.05, clip * 1.05)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def render_spectrum(spectrum: Spectrum, path: str) -> str:
    """Ladder plot of levels, one column per parity chain."""
    fig, ax = plt.subplots(figsize=(5, 6))
    columns = {}
    for lv in spectrum.levels:
        columns.setdefault(str(lv.parity), []).append(lv.value.epsilon)
    for i, (label, eps) in enumerate(sorted(columns.items())):
        for e in eps:
            ax.hlines(e, i + 0.1, i + 0.9, lw=1.2)
        ax.text(i + 0.5, max(eps) + 0.5, label, ha="center")
    ax.set_xlim(0, max(1, len(columns)))
    ax.set_xticks([])
    ax.set_ylabel("epsilon")
    ax.set_title("energy levels")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def render_spacing(stats: SpacingStats, path: str) -> str:
    """Histogram of the normalized nearest-neighbor spacings."""
    fig, ax = plt.subplots(figsize=(6, 4))
    widths = np.diff(stats.bin_edges)
    ax.bar(stats.bin_edges[:-1], stats.histogram, width=widths,
           align="edge", edgecolor="k", color="tab:blue", alpha=0.7)
    ax.axvline(1.0, color="tab:red", ls="--", lw=0.8)
    ax.set_xlabel("normalized spacing")
    ax.set_ylabel("count")
    ax.set_title(f"level spacings (n = {stats.count})")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
