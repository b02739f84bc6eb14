"""Zigzag and Harper lattice Hamiltonians and their exact spectra.

Site indices are 1-based throughout (n = 1..N), matching the n mod 3
drive pattern used elsewhere.  The single-excitation basis vector with
index n-1 carries the excitation on site n.

Conventions (the classic sign-bug traps, stated once):
  <psi_n|H|psi_{n+2}> = J * exp(+i*n*phi)        leg (next-nearest) hop
  <psi_n|H|psi_{n+1}> = J * exp(-i*(n+1)*phi)    zigzag (nearest) hop
so the flux through each rhombus is 3*phi and through the triangle on
sites (n, n+1, n+2) it is (3n+3)*phi.
"""

import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

Boundary = Literal["open", "periodic"]

QUANTIZATION_TOL = 1e-12


class FluxQuantizationError(ValueError):
    """Periodic boundary with N*phi not an integer multiple of 2*pi."""


def _check_boundary(boundary: str) -> None:
    if boundary not in ("open", "periodic"):
        raise ValueError(f"boundary must be 'open' or 'periodic', got {boundary!r}")


def _quantization_defect(n_sites: int, phi: float) -> float:
    """Distance of N*phi from the nearest multiple of 2*pi."""
    turns = n_sites * phi / (2.0 * math.pi)
    return abs(turns - round(turns)) * 2.0 * math.pi


@dataclass(frozen=True)
class LatticeSpec:
    """Zigzag chain parameters: size, coupling J, per-link phase, boundary."""

    n_sites: int
    coupling: float = 1.0
    phi: float = 0.0
    boundary: Boundary = "open"

    def __post_init__(self):
        if self.n_sites < 3:
            raise ValueError("zigzag chain needs n_sites >= 3")
        _check_boundary(self.boundary)
        if self.boundary == "periodic":
            defect = _quantization_defect(self.n_sites, self.phi)
            if defect > QUANTIZATION_TOL:
                raise FluxQuantizationError(
                    f"N*phi off a 2*pi multiple by {defect:.3e}; "
                    "periodic rings require phi = 2*pi*m/N"
                )

    @property
    def flux(self) -> float:
        """Flux through one rhombic cell, 3*phi."""
        return 3.0 * self.phi


def zigzag_links(n_sites: int, boundary: Boundary = "open"):
    """Directed couplings (n, m, phase_exponent) with amplitude J*e^{i*expnt}.

    Yields the upper-triangle element <psi_n|H|psi_m> for every bond, with
    n, m 1-based and m wrapped modulo N on periodic rings.
    """
    _check_boundary(boundary)
    for n in range(1, n_sites + 1):
        for offset, exponent in ((2, n), (1, -(n + 1))):
            m = n + offset
            if m > n_sites:
                if boundary == "open":
                    continue
                m -= n_sites
            yield n, m, exponent


def build_zigzag(spec: LatticeSpec) -> np.ndarray:
    """Single-excitation matrix of the zigzag chain."""
    h = np.zeros((spec.n_sites, spec.n_sites), dtype=complex)
    for n, m, exponent in zigzag_links(spec.n_sites, spec.boundary):
        amp = spec.coupling * np.exp(1j * exponent * spec.phi)
        h[n - 1, m - 1] += amp
        h[m - 1, n - 1] += np.conj(amp)
    return h


def build_harper(
    n_sites: int,
    coupling: float = 1.0,
    flux: float = 0.0,
    boundary: Boundary = "open",
) -> np.ndarray:
    """Harper chain: hops J, on-site energies 2*J*cos(n*flux), n = 1..N."""
    if n_sites < 2:
        raise ValueError("Harper chain needs n_sites >= 2")
    _check_boundary(boundary)
    h = np.zeros((n_sites, n_sites), dtype=complex)
    for n in range(1, n_sites + 1):
        h[n - 1, n - 1] = 2.0 * coupling * math.cos(n * flux)
        m = n + 1
        if m > n_sites:
            if boundary == "open":
                continue
            m -= n_sites
        h[n - 1, m - 1] += coupling
        h[m - 1, n - 1] += coupling
    return h


@dataclass(frozen=True)
class BandProblem:
    """Rational flux Phi/2pi = p/q and a wave vector in the magnetic zone."""

    p: int
    q: int
    k: float

    def __post_init__(self):
        if self.q < 1:
            raise ValueError("q must be >= 1")
        if math.gcd(self.p, self.q) != 1:
            raise ValueError(f"p={self.p} and q={self.q} must be coprime")
        half_zone = math.pi / self.q
        if not (-half_zone - 1e-12 <= self.k <= half_zone + 1e-12):
            raise ValueError(f"k={self.k} outside magnetic zone [-pi/q, pi/q]")

    @property
    def flux(self) -> float:
        return 2.0 * math.pi * self.p / self.q

    @property
    def phi(self) -> float:
        return self.flux / 3.0


def band_coupling(bp: BandProblem, v: int, coupling: float = 1.0) -> complex:
    """Inter-band element between v and v+1: J*(e^{i(k+v*phi)} + e^{-2i(k+v*phi)})."""
    u = bp.k + v * bp.phi
    return coupling * (np.exp(1j * u) + np.exp(-2j * u))


def band_hamiltonian(bp: BandProblem, coupling: float = 1.0) -> np.ndarray:
    """q x q band matrix with plain cyclic coupling v -> v+1 (mod q).

    For q = 1 the single wrap self-coupling gives the scalar dispersion
    2*J*(cos k + cos 2k).
    """
    q = bp.q
    h = np.zeros((q, q), dtype=complex)
    for v in range(q):
        amp = band_coupling(bp, v, coupling)
        w = (v + 1) % q
        h[v, w] += amp
        h[w, v] += np.conj(amp)
    return h


def allowed_k(n_sites: int, q: int) -> np.ndarray:
    """Ring momenta 2*pi*m/N inside the magnetic zone [-pi/q, pi/q).

    N/q values when q divides N; each carries q band eigenvalues so the
    union reproduces the N periodic real-space levels.
    """
    ks = []
    for m in range(-(n_sites // 2), n_sites - n_sites // 2):
        k = 2.0 * math.pi * m / n_sites
        if -math.pi / q - 1e-12 <= k < math.pi / q - 1e-12:
            ks.append(k)
    return np.array(sorted(ks))


def band_spectrum_union(n_sites: int, p: int, q: int, coupling: float = 1.0) -> np.ndarray:
    """Sorted union over allowed k of the q-band eigenvalues."""
    levels = []
    for k in allowed_k(n_sites, q):
        bp = BandProblem(p=p, q=q, k=k)
        levels.extend(np.linalg.eigvalsh(band_hamiltonian(bp, coupling)))
    return np.sort(np.asarray(levels))


def snap_flux(flux: float, n_sites: int, model: str = "zigzag") -> float:
    """Snap a flux to the torus-quantized grid of an N-site ring.

    zigzag: phi = flux/3 must hit 2*pi*m/N, i.e. flux on 2*pi*(3m)/N;
    harper: the on-site modulation needs flux on 2*pi*m/N.
    """
    if model == "zigzag":
        step = 2.0 * math.pi * 3.0 / n_sites
    elif model == "harper":
        step = 2.0 * math.pi / n_sites
    else:
        raise ValueError(f"unknown model {model!r}")
    return round(flux / step) * step


@dataclass(frozen=True)
class FluxSpectrum:
    """Exact sorted eigenvalues (units of J) for one flux value."""

    flux: float
    requested_flux: float
    eigenvalues: np.ndarray = field(repr=False)


def exact_spectrum_at(
    flux: float, n_sites: int, boundary: Boundary, model: str, coupling: float = 1.0
) -> FluxSpectrum:
    """Diagonalize one flux point, snapping to the quantized grid on rings."""
    used = snap_flux(flux, n_sites, model) if boundary == "periodic" else flux
    if model == "zigzag":
        h = build_zigzag(
            LatticeSpec(n_sites=n_sites, coupling=coupling, phi=used / 3.0, boundary=boundary)
        )
    elif model == "harper":
        h = build_harper(n_sites, coupling=coupling, flux=used, boundary=boundary)
    else:
        raise ValueError(f"unknown model {model!r}")
    return FluxSpectrum(flux=used, requested_flux=flux, eigenvalues=np.linalg.eigvalsh(h))


def exact_butterfly(
    n_sites: int,
    boundary: Boundary,
    flux_values,
    model: str = "zigzag",
    coupling: float = 1.0,
) -> list[FluxSpectrum]:
    """Exact spectra over a flux grid (the parallel path lives in sweep)."""
    return [
        exact_spectrum_at(f, n_sites, boundary, model, coupling) for f in flux_values
    ]


def default_flux_grid(count: int = 120) -> np.ndarray:
    """count flux values with Phi/2pi covering [0, 1)."""
    if count < 1:
        raise ValueError("count must be positive")
    return 2.0 * math.pi * np.arange(count) / count
