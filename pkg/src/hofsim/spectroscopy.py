"""From sampled coherences to energy spectra and peak lists.

A run prepares (|vacuum> + |site n>)/sqrt(2), records 2*<sigma_n^-> (the
x+iy Bloch components), Fourier transforms each site's record and sums the
squared amplitudes over sites.  On the reported frequency axis a component
oscillating as exp(-i*E*t) shows up at +E/(2*pi), so peak positions read
directly as single-excitation energies (vacuum energy = 0 reference).
"""

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import dynamics as dyn
from .numerics import fft_power

ENGINES = ("unitary", "lindblad", "trajectories")

COHERENCE_BOUND_SLACK = 2e-6


@dataclass(frozen=True)
class ExpectationRecord:
    """Uniformly sampled 2*<sigma_site^-> time series."""

    site: int
    times: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)
    flux: float = math.nan
    engine: str = ""

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        values = np.asarray(self.values, dtype=complex)
        if times.ndim != 1 or times.shape != values.shape:
            raise ValueError("times and values must be 1-d and congruent")
        if times.size < 2:
            raise ValueError("need at least two samples")
        steps = np.diff(times)
        dt = steps[0]
        if not (dt > 0.0) or np.max(np.abs(steps - dt)) > 1e-12 * dt:
            raise ValueError("sample instants must be uniformly spaced")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0])


@dataclass(frozen=True)
class SpectrumRow:
    """Power spectrum (summed over sites) at one flux value."""

    flux: float
    frequencies: np.ndarray = field(repr=False)  # Hz, ascending, symmetric about 0
    power: np.ndarray = field(repr=False)

    @property
    def bin_width(self) -> float:
        return float(self.frequencies[1] - self.frequencies[0])


@dataclass(frozen=True)
class PeakList:
    """Interpolated spectral maxima, ascending in frequency."""

    frequencies: np.ndarray
    heights: np.ndarray

    def __len__(self) -> int:
        return self.frequencies.shape[0]


def record_run(
    site: int,
    source: dyn.HamiltonianSource,
    grid: dyn.TimeGrid,
    engine: str = "lindblad",
    noise: Optional[dyn.NoiseSpec] = None,
    trajectories: Optional[dyn.TrajectoryConfig] = None,
    flux: float = math.nan,
) -> ExpectationRecord:
    """Prepare (|0...0> + |site>)/sqrt(2), evolve, sample 2*<sigma_site^->.

    Engines: 'unitary' (closed system; noise must be None), 'lindblad'
    (exact master equation) and 'trajectories' (quantum-jump average,
    needs a TrajectoryConfig).

    The lindblad path exploits an exact reduction: with site-uniform rates
    the vacuum/one-excitation coherence column obeys the closed equation
    d(rho_m0)/dt = -i*(H rho)_m0 - rho_m0/T2*, so the record equals the
    closed-system record times exp(-t/T2*).  evolve_lindblad integrates
    the full master equation and agrees to integrator accuracy (tested).
    """
    if engine not in ENGINES:
        raise ValueError(f"unknown engine {engine!r}; choose one of {ENGINES}")
    n_sites = source.dim - 1
    psi0 = dyn.ground_superposition(n_sites, site)
    if engine == "unitary":
        if noise is not None:
            raise ValueError("unitary engine is closed-system; pass noise=None")
        samples = dyn.evolve_unitary(psi0, source, grid)
        values = 2.0 * np.conj(samples.states[:, 0]) * samples.states[:, site]
        times = samples.times
    elif engine == "lindblad":
        samples = dyn.evolve_unitary(psi0, source, grid)
        values = 2.0 * np.conj(samples.states[:, 0]) * samples.states[:, site]
        if noise is not None:
            values = values * np.exp(-samples.times / noise.t2_star)
        times = samples.times
    else:
        if trajectories is None:
            raise ValueError("trajectories engine needs a TrajectoryConfig")
        result = dyn.evolve_trajectories(psi0, source, noise, grid, trajectories, site)
        values = 2.0 * result.sigma_minus
        times = result.times
    return ExpectationRecord(site=site, times=times, values=values, flux=flux, engine=engine)


def _reported_axis(freqs: np.ndarray, power: np.ndarray):
    """Negate the DFT axis so exp(-iEt) peaks at +E/2pi; drop the unpaired
    Nyquist bin so the axis is symmetric about zero."""
    freqs = -freqs[::-1]
    power = power[::-1]
    return freqs[:-1], power[:-1]


def spectrum_of(
    records: Sequence[ExpectationRecord],
    zero_pad_factor: int = 4,
    window: str = "rectangular",
) -> SpectrumRow:
    """Sum of per-site squared FT amplitudes on the energy-reading axis.

    Pass a single record for the one-site (partial) spectrum.  All records
    must share the sampling grid; mixing fluxes is rejected.
    """
    if not records:
        raise ValueError("need at least one record")
    first = records[0]
    for rec in records[1:]:
        if rec.times.shape != first.times.shape or np.max(np.abs(rec.times - first.times)) > 1e-12 * first.dt:
            raise ValueError("records do not share one time grid")
        if not (math.isnan(rec.flux) and math.isnan(first.flux)) and rec.flux != first.flux:
            raise ValueError("records mix flux values")
    if window == "rectangular":
        taper = None
    elif window == "hann":
        taper = np.hanning(first.times.size)
    else:
        raise ValueError(f"unknown window {window!r}")
    powers = []
    frequencies = None
    for rec in records:
        values = rec.values if taper is None else rec.values * taper
        freqs, power = fft_power(values, first.dt, zero_pad_factor)
        freqs, power = _reported_axis(freqs, power)
        frequencies = freqs
        powers.append(power)
    total = np.sum(np.stack(powers), axis=0)
    return SpectrumRow(flux=first.flux, frequencies=frequencies, power=total)


_DELTA_LINE_LOG_RATIO = 21.0  # neighbors below e^-21 of the apex: treat as a delta


def _refine(log_p, i: int):
    """Parabolic vertex through three log-power points.

    Returns offset 0 for degenerate data: non-finite logs (zero-power
    neighbors) or neighbors so far down that the line is a numerical delta
    and the interpolation would only amplify rounding noise.
    """
    lm, l0, lp = log_p[i - 1], log_p[i], log_p[i + 1]
    if not (np.isfinite(lm) and np.isfinite(l0) and np.isfinite(lp)):
        return 0.0, l0
    if l0 - lm > _DELTA_LINE_LOG_RATIO or l0 - lp > _DELTA_LINE_LOG_RATIO:
        return 0.0, l0
    denom = lm - 2.0 * l0 + lp
    if denom >= 0.0:
        return 0.0, l0
    offset = 0.5 * (lm - lp) / denom
    offset = min(0.5, max(-0.5, offset))
    vertex = l0 - 0.25 * (lm - lp) * offset
    return offset, vertex


def detect_peaks(
    row: SpectrumRow,
    rel_threshold: float = 0.05,
    min_separation: Optional[float] = None,
) -> PeakList:
    """Strict local maxima above rel_threshold * max(power), refined by
    3-point parabolic interpolation on log power.

    Maxima closer than min_separation (Hz; default one bin of this row)
    are merged keeping the higher one.
    """
    if not (0.0 < rel_threshold < 1.0):
        raise ValueError("rel_threshold must be in (0, 1)")
    power = row.power
    if power.size < 3 or np.max(power) <= 0.0:
        return PeakList(frequencies=np.empty(0), heights=np.empty(0))
    if min_separation is None:
        min_separation = row.bin_width
    floor = rel_threshold * float(np.max(power))
    interior = np.arange(1, power.size - 1)
    is_max = (power[interior] > power[interior - 1]) & (power[interior] > power[interior + 1])
    candidates = interior[is_max & (power[interior] >= floor)]
    with np.errstate(divide="ignore"):
        log_p = np.log(power)
    found = []  # (frequency, height)
    for i in candidates:
        offset, log_vertex = _refine(log_p, int(i))
        found.append((row.frequencies[i] + offset * row.bin_width, math.exp(log_vertex)))
    merged = []
    for freq, height in found:  # ascending in frequency already
        if merged and freq - merged[-1][0] < min_separation:
            if height > merged[-1][1]:
                merged[-1] = (freq, height)
        else:
            merged.append((freq, height))
    if not merged:
        return PeakList(frequencies=np.empty(0), heights=np.empty(0))
    freqs, heights = zip(*merged)
    return PeakList(frequencies=np.array(freqs), heights=np.array(heights))


def eigenenergies_reference(h_or_spec) -> np.ndarray:
    """Sorted single-excitation energies of a lattice matrix or LatticeSpec.

    Energies are relative to the vacuum level, which sits at 0 by
    construction, so they are directly comparable to detected peaks.
    """
    from .model import LatticeSpec, build_zigzag
    from .numerics import eig_hermitian

    if isinstance(h_or_spec, LatticeSpec):
        h = build_zigzag(h_or_spec)
    else:
        h = np.asarray(h_or_spec, dtype=complex)
    return eig_hermitian(h).eigenvalues
