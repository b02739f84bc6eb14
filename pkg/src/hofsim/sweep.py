"""Flux sweeps: exact butterflies, spectroscopic butterflies, datasets.

Parallelism model: the work unit is one flux row (exact variant) or one
(flux, site) evolution (spectroscopic variant).  Tasks are pure functions
of (config, indices), results are gathered by index and reduced in fixed
order, so datasets are bit-identical for any worker count.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from functools import partial
from typing import Optional

import numpy as np

from . import dynamics as dyn
from . import model
from . import modulation as mod
from . import spectroscopy as spec

CSV_EXACT_HEADER = "flux_over_2pi,eigenvalue_over_J"
CSV_HEATMAP_HEADER = "flux_over_2pi,frequency_mhz,power"
CSV_PEAKS_HEADER = "flux_over_2pi,peak_mhz,height"
CSV_DEVIATIONS_HEADER = "flux_over_2pi,peak_mhz,matched_eigenvalue_mhz,deviation_mhz"
CSV_TRACE_HEADER = "t_us,sx,sy"
CSV_SPECTRUM_HEADER = "frequency_mhz,power"


@dataclass(frozen=True)
class SweepConfig:
    """Everything a sweep needs, in core units (rad/s, seconds)."""

    n_sites: int = 14
    model: str = "zigzag"
    boundary: str = "open"
    flux_count: int = 120
    engine: str = "lindblad"
    g: float = 2.0 * math.pi * 10e6
    base_frequencies: tuple = mod.DEFAULT_BASE_FREQUENCIES
    alpha: float = 1.0
    t1: Optional[float] = 20e-6
    t2_star: Optional[float] = 2e-6
    t_end: float = 4e-6
    dt_sample: float = 2e-9
    rtol: float = 1e-8
    atol: float = 1e-10
    zero_pad_factor: int = 4
    window: str = "rectangular"
    rel_threshold: float = 0.05
    min_separation_bins: float = 1.0
    trajectory_count: int = 500
    seed: int = 0

    def __post_init__(self):
        if self.engine not in spec.ENGINES:
            raise ValueError(f"unknown engine {self.engine!r}")
        if self.model not in ("zigzag", "harper"):
            raise ValueError(f"unknown model {self.model!r}")
        if self.flux_count < 1:
            raise ValueError("flux_count must be >= 1")
        if (self.t1 is None) != (self.t2_star is None):
            raise ValueError("set both or neither of t1, t2_star")

    def flux_values(self) -> np.ndarray:
        """Requested fluxes: flux_count values of Phi over [0, 2*pi)."""
        return model.default_flux_grid(self.flux_count)

    def noise(self) -> Optional[dyn.NoiseSpec]:
        if self.t1 is None:
            return None
        return dyn.NoiseSpec(t1=self.t1, t2_star=self.t2_star)

    def time_grid(self) -> dyn.TimeGrid:
        return dyn.TimeGrid(
            t_end=self.t_end, dt_sample=self.dt_sample, rtol=self.rtol, atol=self.atol
        )

    def device(self) -> mod.DeviceSpec:
        return mod.DeviceSpec(n_qubits=self.n_sites, g=self.g)

    def schedule_for(self, flux: float) -> mod.DriveSchedule:
        """Drive schedule realizing per-link phase phi = Phi/3."""
        return mod.make_schedule(
            self.device(), flux / 3.0, self.alpha, self.base_frequencies
        )

    def effective_lattice(self, flux: float) -> model.LatticeSpec:
        return model.LatticeSpec(
            n_sites=self.n_sites,
            coupling=mod.effective_coupling_strength(self.g, self.alpha),
            phi=flux / 3.0,
            boundary=self.boundary,
        )


@dataclass
class ButterflyDataset:
    """Per-flux results plus the bookkeeping needed for the manifest."""

    variant: str  # "exact" | "spectroscopic"
    config: SweepConfig
    flux_values: np.ndarray
    rows: list = field(repr=False)  # FluxSpectrum | SpectrumRow | None per flux
    peaks: Optional[list] = field(default=None, repr=False)
    row_seconds: list = field(default_factory=list, repr=False)
    errors: list = field(default_factory=list, repr=False)  # str | None per flux


def _run_ordered(fn, items, threads: int, progress=None):
    """Parallel map with order-stable results; threads <= 1 runs inline.

    progress(done, total) fires as tasks finish (any order); the returned
    list is always in submission order, so reductions stay deterministic.
    """
    total = len(items)
    if threads <= 1:
        out = []
        for i, item in enumerate(items):
            out.append(fn(item))
            if progress is not None:
                progress(i + 1, total)
        return out
    from concurrent.futures import as_completed

    with ProcessPoolExecutor(max_workers=threads) as pool:
        index_of = {pool.submit(fn, item): i for i, item in enumerate(items)}
        results = [None] * total
        done = 0
        for future in as_completed(index_of):
            results[index_of[future]] = future.result()
            done += 1
            if progress is not None:
                progress(done, total)
        return results


def _exact_row(cfg: SweepConfig, flux: float):
    start = time.perf_counter()
    try:
        row = model.exact_spectrum_at(
            flux, cfg.n_sites, cfg.boundary, cfg.model, coupling=1.0
        )
        return row, time.perf_counter() - start, None
    except model.FluxQuantizationError as exc:
        return None, time.perf_counter() - start, str(exc)


def run_exact_sweep(cfg: SweepConfig, threads: int = 1, progress=None) -> ButterflyDataset:
    """Exact eigenvalues (units of J) for every flux in the grid.

    Quantization failures are isolated to their row; the sweep continues.
    """
    fluxes = cfg.flux_values()
    results = _run_ordered(partial(_exact_row, cfg), list(fluxes), threads, progress)
    return ButterflyDataset(
        variant="exact", config=cfg, flux_values=fluxes,
        rows=[r for r, _, _ in results],
        row_seconds=[s for _, s, _ in results],
        errors=[e for _, _, e in results],
    )


def _spectro_cell(cfg: SweepConfig, task):
    """One (flux index, site) evolution; returns the sampled record values."""
    flux_index, site = task
    flux = float(cfg.flux_values()[flux_index])
    start = time.perf_counter()
    try:
        source = dyn.DriveHamiltonian(cfg.device(), cfg.schedule_for(flux))
        if cfg.engine == "trajectories":
            record = spec.record_run(
                site, source, cfg.time_grid(), engine="trajectories",
                noise=cfg.noise(),
                trajectories=_cell_trajectories(cfg, flux_index, site),
                flux=flux,
            )
        else:
            record = spec.record_run(
                site, source, cfg.time_grid(), engine=cfg.engine,
                noise=cfg.noise() if cfg.engine != "unitary" else None,
                flux=flux,
            )
        return record.values, time.perf_counter() - start, None
    except Exception as exc:  # isolate the cell, report in the manifest
        return None, time.perf_counter() - start, f"site {site}: {exc}"


def _cell_trajectories(cfg: SweepConfig, flux_index: int, site: int) -> dyn.TrajectoryConfig:
    """Distinct deterministic seed per (flux, site) cell."""
    mix = (cfg.seed * 1000003 + flux_index * 1009 + site) & 0x7FFFFFFFFFFFFFFF
    return dyn.TrajectoryConfig(count=cfg.trajectory_count, seed=mix)


def run_spectro_sweep(cfg: SweepConfig, threads: int = 1, progress=None) -> ButterflyDataset:
    """Spectroscopic butterfly: N records per flux, summed spectra, peaks."""
    fluxes = cfg.flux_values()
    tasks = [(i, site) for i in range(len(fluxes)) for site in range(1, cfg.n_sites + 1)]
    results = _run_ordered(partial(_spectro_cell, cfg), tasks, threads, progress)
    times = cfg.time_grid().times()
    rows, peaks, row_seconds, errors = [], [], [], []
    for i, flux in enumerate(fluxes):
        cell = results[i * cfg.n_sites:(i + 1) * cfg.n_sites]
        row_seconds.append(sum(seconds for _, seconds, _ in cell))
        failures = [err for _, _, err in cell if err is not None]
        if failures:
            rows.append(None)
            peaks.append(None)
            errors.append("; ".join(failures))
            continue
        records = [
            spec.ExpectationRecord(site=site, times=times, values=values,
                                   flux=float(flux), engine=cfg.engine)
            for site, (values, _, _) in zip(range(1, cfg.n_sites + 1), cell)
        ]
        row = spec.spectrum_of(records, cfg.zero_pad_factor, cfg.window)
        rows.append(row)
        peaks.append(
            spec.detect_peaks(
                row, cfg.rel_threshold, cfg.min_separation_bins * row.bin_width
            )
        )
        errors.append(None)
    return ButterflyDataset(
        variant="spectroscopic", config=cfg, flux_values=fluxes,
        rows=rows, peaks=peaks, row_seconds=row_seconds, errors=errors,
    )


@dataclass(frozen=True)
class FluxDeviation:
    """Peak-to-theory match at one flux; frequencies in Hz."""

    flux: float
    peak_frequencies: np.ndarray
    matched_levels: np.ndarray
    deviations: np.ndarray
    unmatched_levels: np.ndarray


@dataclass(frozen=True)
class DeviationReport:
    per_flux: list
    mean_abs: float
    max_abs: float
    n_peaks: int
    n_unmatched_levels: int


def compare_to_theory(ds: ButterflyDataset) -> DeviationReport:
    """Match detected peaks to the nearest exact eigenvalue per flux.

    Levels come from the effective lattice (J = g*J0(alpha)*J1(alpha)) and
    are reported in Hz alongside the peaks.
    """
    if ds.variant != "spectroscopic":
        raise ValueError("deviation report needs a spectroscopic dataset")
    per_flux = []
    all_devs = []
    unmatched_total = 0
    for flux, peaks in zip(ds.flux_values, ds.peaks):
        if peaks is None:
            continue
        lattice = ds.config.effective_lattice(float(flux))
        levels = spec.eigenenergies_reference(lattice) / (2.0 * math.pi)
        if len(peaks) == 0:
            per_flux.append(FluxDeviation(float(flux), np.empty(0), np.empty(0),
                                          np.empty(0), levels))
            unmatched_total += levels.size
            continue
        idx = np.array([int(np.argmin(np.abs(levels - f))) for f in peaks.frequencies])
        matched = levels[idx]
        devs = np.abs(peaks.frequencies - matched)
        unmatched = np.setdiff1d(np.arange(levels.size), idx)
        unmatched_total += unmatched.size
        all_devs.extend(devs.tolist())
        per_flux.append(FluxDeviation(
            flux=float(flux), peak_frequencies=peaks.frequencies,
            matched_levels=matched, deviations=devs,
            unmatched_levels=levels[unmatched],
        ))
    mean_abs = float(np.mean(all_devs)) if all_devs else math.nan
    max_abs = float(np.max(all_devs)) if all_devs else math.nan
    return DeviationReport(
        per_flux=per_flux, mean_abs=mean_abs, max_abs=max_abs,
        n_peaks=len(all_devs), n_unmatched_levels=unmatched_total,
    )


def _fmt(x: float) -> str:
    """Full-precision, locale-independent float formatting."""
    return repr(float(x))


def write_exact_csv(path, ds: ButterflyDataset) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(CSV_EXACT_HEADER + "\n")
        for row in ds.rows:
            if row is None:
                continue
            flux_turns = row.flux / (2.0 * math.pi)
            for ev in row.eigenvalues:
                fh.write(f"{_fmt(flux_turns)},{_fmt(ev)}\n")


def write_heatmap_csv(path, ds: ButterflyDataset) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(CSV_HEATMAP_HEADER + "\n")
        for flux, row in zip(ds.flux_values, ds.rows):
            if row is None:
                continue
            flux_turns = float(flux) / (2.0 * math.pi)
            for freq, power in zip(row.frequencies, row.power):
                fh.write(f"{_fmt(flux_turns)},{_fmt(freq / 1e6)},{_fmt(power)}\n")


def write_peaks_csv(path, ds: ButterflyDataset) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(CSV_PEAKS_HEADER + "\n")
        for flux, peaks in zip(ds.flux_values, ds.peaks or []):
            if peaks is None:
                continue
            flux_turns = float(flux) / (2.0 * math.pi)
            for freq, height in zip(peaks.frequencies, peaks.heights):
                fh.write(f"{_fmt(flux_turns)},{_fmt(freq / 1e6)},{_fmt(height)}\n")


def write_deviations_csv(path, report: DeviationReport) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(CSV_DEVIATIONS_HEADER + "\n")
        for fd in report.per_flux:
            flux_turns = fd.flux / (2.0 * math.pi)
            for freq, level, deviation in zip(
                fd.peak_frequencies, fd.matched_levels, fd.deviations
            ):
                fh.write(
                    f"{_fmt(flux_turns)},{_fmt(freq / 1e6)},"
                    f"{_fmt(level / 1e6)},{_fmt(deviation / 1e6)}\n"
                )


def write_trace_csv(path, record: spec.ExpectationRecord) -> None:
    """Time series of the Bloch components sx = Re, sy = Im of 2<sigma^->."""
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(CSV_TRACE_HEADER + "\n")
        for t, v in zip(record.times, record.values):
            fh.write(f"{_fmt(t * 1e6)},{_fmt(v.real)},{_fmt(v.imag)}\n")


def write_spectrum_csv(path, row: spec.SpectrumRow) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(CSV_SPECTRUM_HEADER + "\n")
        for freq, power in zip(row.frequencies, row.power):
            fh.write(f"{_fmt(freq / 1e6)},{_fmt(power)}\n")
