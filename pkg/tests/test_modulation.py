"""Drive schedules, effective couplings and the exact interaction picture."""

import math

import numpy as np
import pytest

from hofsim.model import LatticeSpec, build_zigzag
from hofsim.modulation import (
    DEFAULT_BASE_FREQUENCIES,
    DeviceSpec,
    DriveSchedule,
    InconsistentFrequencyError,
    effective_coupling_strength,
    effective_couplings,
    effective_hamiltonian,
    interaction_hamiltonian_at,
    make_schedule,
    matched_lattice,
    phase_for_site,
)

TWO_PI = 2.0 * math.pi
MHZ = TWO_PI * 1e6
DEVICE = DeviceSpec(n_qubits=6, g=10 * MHZ)


def bessel_series(order, x, terms=40):
    total = 0.0
    for k in range(terms):
        total += (-1) ** k * (x / 2.0) ** (2 * k + order) / (
            math.factorial(k) * math.factorial(k + order)
        )
    return total


# ------------------------------------------------------------------ schedule

def test_phase_rule():
    assert phase_for_site(1, 0.0) == pytest.approx(math.pi)
    phi = TWO_PI / 120.0
    assert phase_for_site(2, phi) == pytest.approx(4.0 * math.pi / 120.0)
    assert phase_for_site(3, phi) == pytest.approx(3.0 * phi)
    assert phase_for_site(4, phi) == pytest.approx(math.pi - 4.0 * phi)


def test_default_frequency_setting_satisfies_sideband_matching():
    w1, w2, w3 = DEFAULT_BASE_FREQUENCIES
    nu = (w1 - w3, w1 - w2, w2 - w3)
    assert nu[0] / MHZ == pytest.approx(250.0)
    assert nu[1] / MHZ == pytest.approx(150.0)
    assert nu[2] / MHZ == pytest.approx(100.0)
    assert nu[0] == pytest.approx(nu[1] + nu[2], rel=1e-12)


def test_make_schedule_period3_pattern():
    sch = make_schedule(DEVICE, 0.05, 1.0)
    for n in range(DEVICE.n_qubits):
        assert sch.omega_bar[n] == sch.omega_bar[n % 3]
        assert sch.nu[n] == sch.nu[n % 3]
        assert sch.epsilon[n] == pytest.approx(sch.nu[n])  # alpha = 1
    assert np.allclose(sch.alpha, 1.0)


def test_inconsistent_frequencies_raise():
    bad = DriveSchedule(
        omega_bar=np.array([1.0, 0.9, 0.8] * 2) * 1e10,
        epsilon=np.zeros(6),
        nu=np.array([2e9, 1e9, 0.5e9] * 2),
        theta=np.zeros(6),
    )
    with pytest.raises(InconsistentFrequencyError):
        bad.validate(g=1e7)


def test_low_detuning_ratio_warns():
    base = tuple(TWO_PI * f for f in (5.0e9, 4.99e9, 4.985e9))
    with pytest.warns(UserWarning):
        make_schedule(DEVICE, 0.0, 1.0, base_frequencies=base)


def test_alpha_bounds():
    with pytest.raises(ValueError):
        make_schedule(DEVICE, 0.0, 2.0)
    make_schedule(DEVICE, 0.0, 0.0)  # drive off is allowed


# -------------------------------------------------------------- effective H

def test_alpha_zero_kills_couplings():
    sch = make_schedule(DEVICE, 0.3, 0.0)
    eff = effective_couplings(DEVICE, sch)
    assert np.all(eff.nn == 0.0)
    assert np.all(eff.nnn == 0.0)
    assert np.all(effective_hamiltonian(eff) == 0.0)


def test_coupling_magnitude_from_bessel_oracle():
    # |J| = g * J0(1) * J1(1): 10 MHz * 0.33672... = 3.367 MHz
    sch = make_schedule(DEVICE, 0.1, 1.0)
    eff = effective_couplings(DEVICE, sch)
    expected = 10e6 * bessel_series(0, 1.0) * bessel_series(1, 1.0)
    assert expected == pytest.approx(3.3672e6, rel=1e-4)
    for amp in list(eff.nn) + list(eff.nnn):
        assert abs(amp) / TWO_PI == pytest.approx(expected, rel=1e-12)


@pytest.mark.parametrize("n_qubits", [3, 5, 14, 20])
def test_effective_hamiltonian_equals_zigzag(n_qubits):
    device = DeviceSpec(n_qubits=n_qubits, g=10 * MHZ)
    scale = effective_coupling_strength(device.g, 1.0)
    for phi in np.linspace(0.0, TWO_PI, 9, endpoint=False):
        sch = make_schedule(device, phi, 1.0)
        h_eff = effective_hamiltonian(effective_couplings(device, sch))
        h_ref = build_zigzag(matched_lattice(device, phi, 1.0))
        assert np.max(np.abs(h_eff - h_ref)) <= 1e-12 * scale


def test_n3_links_by_hand():
    # manual expansion of the three links for N = 3, using the piecewise rules
    phi = 0.21
    alpha = 0.8
    device = DeviceSpec(n_qubits=3, g=10 * MHZ)
    sch = make_schedule(device, phi, alpha)
    eff = effective_couplings(device, sch)
    g = device.g
    j0, j1 = bessel_series(0, alpha), bessel_series(1, alpha)
    th = [math.pi - phi, 2 * phi, 3 * phi]
    # link 1-2 (n=1): g J0 J1 e^{i theta_2}; link 2-3 (n=2): g J0 J1 e^{i theta_3}
    assert eff.nn[0] == pytest.approx(g * j0 * j1 * np.exp(1j * th[1]), rel=1e-10)
    assert eff.nn[1] == pytest.approx(g * j0 * j1 * np.exp(1j * th[2]), rel=1e-10)
    # link 1-3 (n=1): g J0 J_{-1} e^{-i theta_1} = -g J0 J1 e^{-i theta_1}
    assert eff.nnn[0] == pytest.approx(-g * j0 * j1 * np.exp(-1j * th[0]), rel=1e-10)


# ------------------------------------------------------- interaction picture

def test_undriven_degenerate_chain_is_constant_g():
    n = 5
    device = DeviceSpec(n_qubits=n, g=10 * MHZ)
    sch = DriveSchedule(
        omega_bar=np.full(n, TWO_PI * 5e9),
        epsilon=np.zeros(n),
        nu=np.full(n, TWO_PI * 1e8),
        theta=np.zeros(n),
    )
    for t in (0.0, 3.7e-9, 1e-6):
        h = interaction_hamiltonian_at(t, device, sch)
        for m, k in [(1, 0), (2, 0), (3, 2), (4, 2)]:
            assert h[m, k] == device.g
        assert np.all(np.diag(h) == 0.0)


def test_interaction_picture_anchored_at_t0():
    sch = make_schedule(DEVICE, 0.4, 1.0)
    h0 = interaction_hamiltonian_at(0.0, DEVICE, sch)
    mask = h0 != 0.0
    assert np.all(h0[mask] == DEVICE.g)


def test_time_average_reproduces_effective_coupling():
    # DC part of <psi_2|H(t)|psi_1> over one common drive period, with the
    # t = 0 anchor phases divided out, equals J_{1,2} to a few cross terms.
    device = DeviceSpec(n_qubits=3, g=10 * MHZ)
    phi = TWO_PI / 120.0
    alpha = 1.0
    sch = make_schedule(device, phi, alpha)
    period = 1.0 / 50e6  # frequencies are multiples of 50 MHz
    n_steps = 20000
    ts = (np.arange(n_steps) + 0.5) * (period / n_steps)
    acc = 0.0 + 0.0j
    for t in ts:
        acc += interaction_hamiltonian_at(t, device, sch)[1, 0]
    acc /= n_steps
    # the DC term carries the t = 0 anchor e^{i*alpha*(sin th1 - sin th2)}
    anchor = np.exp(-1j * alpha * (np.sin(sch.theta[0]) - np.sin(sch.theta[1])))
    expected = effective_couplings(device, sch).nn[0]
    assert abs(acc * anchor - expected) <= 0.02 * abs(expected)


def test_global_frequency_offset_is_gauge():
    # only differences Delta_mn enter; test at t <= 100 ns where the input
    # rounding of the shifted GHz frequencies stays below the 1e-12 budget
    offset = TWO_PI * 0.35e9
    shifted = tuple(w + offset for w in DEFAULT_BASE_FREQUENCIES)
    sch_a = make_schedule(DEVICE, 0.13, 1.0)
    sch_b = make_schedule(DEVICE, 0.13, 1.0, base_frequencies=shifted)
    for t in np.linspace(0.0, 100e-9, 11):
        ha = interaction_hamiltonian_at(t, DEVICE, sch_a)
        hb = interaction_hamiltonian_at(t, DEVICE, sch_b)
        assert np.max(np.abs(ha - hb)) <= 1e-12 * DEVICE.g


def test_effective_spectrum_invariant_under_phi_plus_2pi():
    phi = 0.37
    wa = np.linalg.eigvalsh(effective_hamiltonian(
        effective_couplings(DEVICE, make_schedule(DEVICE, phi, 1.0))))
    wb = np.linalg.eigvalsh(effective_hamiltonian(
        effective_couplings(DEVICE, make_schedule(DEVICE, phi + TWO_PI, 1.0))))
    assert np.max(np.abs(wa - wb)) <= 1e-10 * DEVICE.g
