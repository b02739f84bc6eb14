"""The four figure variants.

Rendering is a pure function of the input CSVs: fixed figure sizes, fixed
color maps, axis limits derived from the data.
"""

import warnings

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from . import io

FIGSIZE = (6.0, 4.5)
DPI = 150


def exact_scatter(inputs, out_path):
    """Eigenvalues (units of J) against flux, one dot per level."""
    (path,) = inputs
    data = io.load_columns(path, io.EXACT_COLUMNS)
    fig, ax = plt.subplots(figsize=FIGSIZE, dpi=DPI)
    ax.plot(data["flux_over_2pi"], data["eigenvalue_over_J"], ".k", markersize=1.2)
    ax.set_xlabel(r"$\Phi/2\pi$")
    ax.set_ylabel(r"$E/J$")
    fig.tight_layout()
    fig.savefig(out_path)
    plt.close(fig)


def traces(inputs, out_path):
    """Two stacked panels: the x and y Bloch components against time."""
    (path,) = inputs
    data = io.load_columns(path, io.TRACE_COLUMNS)
    fig, axes = plt.subplots(2, 1, figsize=FIGSIZE, dpi=DPI, sharex=True)
    axes[0].plot(data["t_us"], data["sx"], lw=0.7)
    axes[0].set_ylabel(r"$\langle\sigma^x\rangle$")
    axes[1].plot(data["t_us"], data["sy"], lw=0.7, color="tab:orange")
    axes[1].set_ylabel(r"$\langle\sigma^y\rangle$")
    axes[1].set_xlabel(r"$t\ (\mu s)$")
    for ax in axes:
        ax.set_ylim(-1.05, 1.05)
    fig.tight_layout()
    fig.savefig(out_path)
    plt.close(fig)


def spectrum(inputs, out_path):
    """Squared FT amplitude against frequency for one run."""
    (path,) = inputs
    data = io.load_columns(path, io.SPECTRUM_COLUMNS)
    fig, ax = plt.subplots(figsize=FIGSIZE, dpi=DPI)
    ax.plot(data["frequency_mhz"], data["power"], lw=0.8)
    ax.set_xlabel("frequency (MHz)")
    ax.set_ylabel(r"$|FT|^2$")
    power = data["power"]
    mask = power >= 1e-4 * np.max(power) if power.size and np.max(power) > 0 else None
    if mask is not None and np.any(mask):
        freqs = data["frequency_mhz"][mask]
        pad = 0.05 * (freqs.max() - freqs.min() + 1.0)
        ax.set_xlim(freqs.min() - pad, freqs.max() + pad)
    fig.tight_layout()
    fig.savefig(out_path)
    plt.close(fig)


def heatmap_overlay(inputs, out_path):
    """Power heatmap over (flux, frequency) with optional overlay points.

    Pass the deviations file to overlay the theoretical eigenvalues (the
    matched_eigenvalue_mhz column) or the peaks file to overlay detected
    peaks.  An overlay file without data rows renders the bare heatmap and
    emits a warning.
    """
    heat_path = inputs[0]
    data = io.load_columns(heat_path, io.HEATMAP_COLUMNS)
    fluxes = np.unique(data["flux_over_2pi"])
    freqs = np.unique(data["frequency_mhz"])
    grid = np.full((freqs.size, fluxes.size), np.nan)
    fi = np.searchsorted(fluxes, data["flux_over_2pi"])
    qi = np.searchsorted(freqs, data["frequency_mhz"])
    grid[qi, fi] = data["power"]
    fig, ax = plt.subplots(figsize=FIGSIZE, dpi=DPI)
    top = np.nanmax(grid) if grid.size else 1.0
    floor = top * 1e-6 if top > 0 else 1.0
    display = np.log10(np.maximum(grid, floor))
    mesh = ax.pcolormesh(fluxes, freqs, display, shading="nearest", cmap="inferno")
    fig.colorbar(mesh, ax=ax, label=r"$\log_{10}$ power")
    ax.set_xlabel(r"$\Phi/2\pi$")
    ax.set_ylabel("frequency (MHz)")
    if len(inputs) > 1:
        flux_pts, freq_pts, kind = io.sniff_overlay(inputs[1])
        if flux_pts.size == 0:
            warnings.warn(f"{inputs[1]}: no overlay rows, rendering bare heatmap",
                          stacklevel=2)
        else:
            label = "theory" if kind == "theory" else "detected peaks"
            ax.plot(flux_pts, freq_pts, ".", color="cyan", markersize=2.0,
                    label=label)
            ax.legend(loc="upper right", fontsize=7)
    fig.tight_layout()
    fig.savefig(out_path)
    plt.close(fig)


VARIANTS = {
    "exact-scatter": (exact_scatter, 1, 1),
    "traces": (traces, 1, 1),
    "spectrum": (spectrum, 1, 1),
    "heatmap-overlay": (heatmap_overlay, 1, 2),
}


def render(variant, inputs, out_path):
    """Dispatch a PlotJob: variant name, input CSV paths, output image."""
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}; choose from {sorted(VARIANTS)}")
    fn, at_least, at_most = VARIANTS[variant]
    if not at_least <= len(inputs) <= at_most:
        raise ValueError(
            f"variant {variant} takes {at_least}"
            + (f"..{at_most}" if at_most != at_least else "")
            + f" input files, got {len(inputs)}"
        )
    fn(list(inputs), out_path)
