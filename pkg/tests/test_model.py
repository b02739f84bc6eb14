"""Lattice builders and exact spectra: gauge loops, Harper, band problem."""

import math

import numpy as np
import pytest

from hofsim.model import (
    BandProblem,
    FluxQuantizationError,
    LatticeSpec,
    band_coupling,
    band_hamiltonian,
    band_spectrum_union,
    build_harper,
    build_zigzag,
    default_flux_grid,
    exact_butterfly,
    exact_spectrum_at,
    snap_flux,
)

TWO_PI = 2.0 * math.pi


def loop_phase(h, cycle):
    """Accumulated hopping phase around a directed cycle of 1-based sites."""
    total = 0.0
    for a, b in zip(cycle, cycle[1:] + cycle[:1]):
        amp = h[b - 1, a - 1]  # <b|H|a> moves the excitation a -> b
        assert amp != 0.0, f"missing link {a}->{b}"
        total += np.angle(amp)
    return total


def wrap(x):
    return (x + math.pi) % TWO_PI - math.pi


# -------------------------------------------------------------------- zigzag

def test_zigzag_zero_phase_entries():
    h = build_zigzag(LatticeSpec(n_sites=4, coupling=1.0, phi=0.0))
    expected = np.zeros((4, 4), complex)
    for n in range(1, 5):
        for off in (1, 2):
            if n + off <= 4:
                expected[n - 1, n + off - 1] = expected[n + off - 1, n - 1] = 1.0
    assert np.array_equal(h, expected)


@pytest.mark.parametrize("phi", [0.3, -1.2, 2.0 * math.pi / 120.0, 2.9])
def test_triangle_loop_phase_matches_flux_pattern(phi):
    n_sites = 9
    h = build_zigzag(LatticeSpec(n_sites=n_sites, phi=phi))
    for n in range(1, n_sites - 1):
        got = loop_phase(h, [n, n + 1, n + 2])
        assert abs(wrap(got - (3 * n + 3) * phi)) < 1e-12


@pytest.mark.parametrize("phi", [0.3, -1.2, 2.0 * math.pi / 120.0])
def test_rhombus_loop_phase_is_uniform(phi):
    n_sites = 9
    h = build_zigzag(LatticeSpec(n_sites=n_sites, phi=phi))
    for n in range(1, n_sites - 2):
        got = loop_phase(h, [n, n + 2, n + 3, n + 1])
        assert abs(wrap(got - 3.0 * phi)) < 1e-12


def test_wrapped_loops_on_quantized_ring():
    n_sites = 10
    phi = TWO_PI * 3 / n_sites
    h = build_zigzag(LatticeSpec(n_sites=n_sites, phi=phi, boundary="periodic"))
    site = lambda n: (n - 1) % n_sites + 1
    for n in range(n_sites - 2, n_sites + 1):  # cycles crossing the seam
        tri = [site(n), site(n + 1), site(n + 2)]
        assert abs(wrap(loop_phase(h, tri) - (3 * n + 3) * phi)) < 1e-9
    for n in range(n_sites - 3, n_sites + 1):
        rho = [site(n), site(n + 2), site(n + 3), site(n + 1)]
        assert abs(wrap(loop_phase(h, rho) - 3.0 * phi)) < 1e-9


def test_structural_hermiticity_is_exact():
    h = build_zigzag(LatticeSpec(n_sites=12, phi=1.234, boundary="open"))
    assert np.max(np.abs(h - h.conj().T)) == 0.0


def test_spectrum_periodic_in_phi():
    spec_a = LatticeSpec(n_sites=8, phi=0.7)
    spec_b = LatticeSpec(n_sites=8, phi=0.7 + TWO_PI)
    wa = np.linalg.eigvalsh(build_zigzag(spec_a))
    wb = np.linalg.eigvalsh(build_zigzag(spec_b))
    assert np.max(np.abs(wa - wb)) < 1e-10


def test_periodic_requires_flux_quantization():
    with pytest.raises(FluxQuantizationError):
        LatticeSpec(n_sites=10, phi=0.1, boundary="periodic")
    LatticeSpec(n_sites=10, phi=TWO_PI * 2 / 10, boundary="periodic")


def test_minimum_size():
    with pytest.raises(ValueError):
        LatticeSpec(n_sites=2)


# -------------------------------------------------------------------- harper

def test_harper_zero_flux_entries():
    h = build_harper(3, coupling=2.0, flux=0.0)
    assert np.allclose(np.diag(h), 4.0)
    assert h[0, 1] == h[1, 2] == 2.0
    assert h[0, 2] == 0.0


def test_harper_trace_is_2nj_at_zero_flux():
    for n in (5, 50):
        h = build_harper(n, coupling=1.5, flux=0.0, boundary="periodic")
        assert np.trace(h).real == pytest.approx(2.0 * n * 1.5, abs=1e-9)


def test_harper_circulant_oracle():
    # Phi = 0, periodic: analytic circulant diagonalization 2J(1 + cos(2*pi*m/N))
    n = 300
    w = np.sort(np.linalg.eigvalsh(build_harper(n, 1.0, 0.0, "periodic")))
    expected = np.sort(2.0 * (1.0 + np.cos(TWO_PI * np.arange(n) / n)))
    assert np.max(np.abs(w - expected)) < 1e-9


# ---------------------------------------------------------------------- band

def test_band_problem_validation():
    with pytest.raises(ValueError):
        BandProblem(p=2, q=4, k=0.0)
    with pytest.raises(ValueError):
        BandProblem(p=1, q=3, k=2.0)


@pytest.mark.parametrize("p,q", [(1, 2), (1, 3), (2, 5)])
def test_band_coupling_magnitude_matches_closed_form(p, q):
    # |J(e^{i(k+v*phi)} + e^{-2i(k+v*phi)})| = J*sqrt(2 + 2cos(3k + v*Phi))
    for k in np.linspace(-math.pi / q, math.pi / q, 7):
        bp = BandProblem(p=p, q=q, k=k)
        for v in range(q):
            got = abs(band_coupling(bp, v, coupling=1.3))
            expected = 1.3 * math.sqrt(max(0.0, 2.0 + 2.0 * math.cos(3 * k + v * bp.flux)))
            assert abs(got - expected) < 1e-12


def test_band_q1_is_scalar_dispersion():
    h = band_hamiltonian(BandProblem(p=0, q=1, k=0.0), coupling=1.0)
    assert h.shape == (1, 1)
    assert h[0, 0] == pytest.approx(4.0)  # 2J(cos 0 + cos 0) with J = 1


@pytest.mark.parametrize("p,q", [(1, 2), (1, 3), (2, 3), (1, 4), (1, 5), (2, 5)])
def test_band_union_equals_real_space_spectrum(p, q):
    n = 3 * q * 3
    union = band_spectrum_union(n, p, q, coupling=1.0)
    phi = TWO_PI * p / (3 * q)
    real = np.sort(np.linalg.eigvalsh(
        build_zigzag(LatticeSpec(n_sites=n, phi=phi, boundary="periodic"))
    ))
    assert union.shape == real.shape
    assert np.max(np.abs(union - real)) < 1e-8


# ----------------------------------------------------------------- butterfly

def test_snap_flux_grids():
    # zigzag grid: multiples of 2*pi*3/N (phi lands on 2*pi*m/N)
    assert snap_flux(0.13 * TWO_PI, 30, "zigzag") / TWO_PI == pytest.approx(0.1)
    assert snap_flux(0.16 * TWO_PI, 30, "zigzag") / TWO_PI == pytest.approx(0.2)
    # harper grid: multiples of 2*pi/N
    assert snap_flux(0.125 * TWO_PI, 30, "harper") / TWO_PI == pytest.approx(4 / 30)
    # snapped values satisfy the periodic LatticeSpec quantization check
    LatticeSpec(n_sites=30, phi=snap_flux(0.13 * TWO_PI, 30, "zigzag") / 3.0,
                boundary="periodic")


def test_exact_spectrum_extremes_at_zero_flux():
    # dispersion 2J(cos k + cos 2k): minimum -2.25J at cos k = -1/4, maximum 4J
    row = exact_spectrum_at(0.0, 300, "periodic", "zigzag")
    assert row.eigenvalues[0] == pytest.approx(-2.25, abs=1e-3)
    assert row.eigenvalues[-1] == pytest.approx(4.0, abs=1e-3)


def test_exact_butterfly_rows_traceless():
    rows = exact_butterfly(60, "periodic", default_flux_grid(12), model="zigzag")
    for row in rows:
        assert abs(np.sum(row.eigenvalues)) < 1e-9 * 60


def test_exact_butterfly_harper_trace():
    rows = exact_butterfly(60, "periodic", [0.0], model="harper")
    assert np.sum(rows[0].eigenvalues) == pytest.approx(120.0, abs=1e-9)


def test_default_flux_grid():
    grid = default_flux_grid(120)
    assert grid.shape == (120,)
    assert grid[0] == 0.0
    assert grid[-1] < TWO_PI
    assert len(np.unique(grid)) == 120
