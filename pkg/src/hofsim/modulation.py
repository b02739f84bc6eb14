"""Frequency-modulation schedules and the couplings they synthesize.

The chain is driven with a period-3 frequency pattern: modulation
frequencies bridge the three central-frequency differences so that first
sidebands bring every nearest and next-nearest link to resonance.  The
surviving slow couplings carry Bessel-renormalized amplitudes and the
initial drive phases, which is what imprints the gauge field.

All frequencies here are angular (rad/s); phases are radians.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .model import LatticeSpec, build_zigzag
from .numerics import bessel_j, hermitian_from_upper

DEFAULT_BASE_FREQUENCIES = tuple(2.0 * math.pi * f for f in (5.00e9, 4.85e9, 4.75e9))
DEFAULT_DETUNING_RATIO = 10.0
ALPHA_MAX = 1.8  # keep J0 well away from its first zero

SIDEBAND_MATCH_RTOL = 1e-9


class InconsistentFrequencyError(ValueError):
    """Modulation frequencies violate nu_1 = nu_2 + nu_3."""


@dataclass(frozen=True, eq=False)
class DeviceSpec:
    """Qubit count and the bare (real) coupling strength g."""

    n_qubits: int
    g: float

    def __post_init__(self):
        if self.n_qubits < 3:
            raise ValueError("need n_qubits >= 3 for the period-3 scheme")
        if not (self.g > 0):
            raise ValueError("coupling g must be positive")


@dataclass(frozen=True, eq=False)
class DriveSchedule:
    """Per-qubit modulation parameters; entry i belongs to qubit i+1."""

    omega_bar: np.ndarray
    epsilon: np.ndarray
    nu: np.ndarray
    theta: np.ndarray

    def __post_init__(self):
        for name in ("omega_bar", "epsilon", "nu", "theta"):
            arr = np.asarray(getattr(self, name), dtype=float)
            object.__setattr__(self, name, arr)
        n = self.omega_bar.shape[0]
        if any(getattr(self, f).shape != (n,) for f in ("epsilon", "nu", "theta")):
            raise ValueError("schedule arrays must share one length")

    @property
    def n_qubits(self) -> int:
        return self.omega_bar.shape[0]

    @property
    def alpha(self) -> np.ndarray:
        """Normalized drive amplitudes eps_n / nu_n."""
        with np.errstate(invalid="ignore", divide="ignore"):
            a = np.where(self.nu != 0.0, self.epsilon / self.nu, 0.0)
        return a

    def validate(self, g: float, detuning_ratio: float = DEFAULT_DETUNING_RATIO) -> None:
        """Check the period-3 pattern, sideband matching and detuning margin.

        A violated nu_1 = nu_2 + nu_3 raises; a detuning ratio below the
        threshold only warns (the schedule is usable, just less accurate).
        """
        for n in range(self.n_qubits):
            j = n % 3
            if not math.isclose(self.omega_bar[n], self.omega_bar[j], rel_tol=1e-12):
                raise ValueError(f"omega_bar breaks the period-3 pattern at qubit {n + 1}")
            if not math.isclose(self.nu[n], self.nu[j], rel_tol=1e-12):
                raise ValueError(f"nu breaks the period-3 pattern at qubit {n + 1}")
        nu1, nu2, nu3 = (self.nu[j % self.n_qubits] for j in (0, 1, 2))
        if self.n_qubits < 3:  # pragma: no cover - DeviceSpec forbids this
            return
        if not math.isclose(nu1, nu2 + nu3, rel_tol=SIDEBAND_MATCH_RTOL, abs_tol=0.0):
            raise InconsistentFrequencyError(
                f"nu_1 = {nu1} must equal nu_2 + nu_3 = {nu2 + nu3}"
            )
        min_detuning = min(abs(nu1), abs(nu2), abs(nu3))
        if min_detuning < detuning_ratio * g * (1.0 - 1e-9):
            warnings.warn(
                f"min |Delta_mn| / g = {min_detuning / g:.2f} below the "
                f"large-detuning ratio {detuning_ratio}; sideband engineering "
                "will be inaccurate",
                stacklevel=2,
            )


def phase_for_site(n: int, phi: float) -> float:
    """Initial drive phase theta_n: pi - n*phi on the n=1 (mod 3) sublattice, n*phi elsewhere."""
    return math.pi - n * phi if n % 3 == 1 else n * phi


def make_schedule(
    device: DeviceSpec,
    phi: float,
    alpha,
    base_frequencies=DEFAULT_BASE_FREQUENCIES,
    detuning_ratio: float = DEFAULT_DETUNING_RATIO,
) -> DriveSchedule:
    """Build the period-3 schedule that synthesizes a uniform per-link phase phi.

    alpha may be a scalar or a per-qubit array in [0, ALPHA_MAX]; alpha = 0
    switches the drive (and with it every effective coupling) off.
    """
    w1, w2, w3 = (float(w) for w in base_frequencies)
    nu_triplet = (w1 - w3, w1 - w2, w2 - w3)
    n = device.n_qubits
    alphas = np.broadcast_to(np.asarray(alpha, dtype=float), (n,)).copy()
    if np.any(alphas < 0.0) or np.any(alphas > ALPHA_MAX):
        raise ValueError(f"alpha must lie in [0, {ALPHA_MAX}]")
    omega_bar = np.array([(w1, w2, w3)[i % 3] for i in range(n)])
    nu = np.array([nu_triplet[i % 3] for i in range(n)])
    theta = np.array([phase_for_site(i + 1, phi) for i in range(n)])
    schedule = DriveSchedule(omega_bar=omega_bar, epsilon=alphas * nu, nu=nu, theta=theta)
    schedule.validate(device.g, detuning_ratio=detuning_ratio)
    return schedule


@dataclass(frozen=True, eq=False)
class EffectiveCouplings:
    """Slow couplings left by the drive: nn[i] on link (i+1, i+2), nnn[i] on (i+1, i+3)."""

    nn: np.ndarray
    nnn: np.ndarray

    @property
    def n_qubits(self) -> int:
        return self.nn.shape[0] + 1


def effective_couplings(device: DeviceSpec, schedule: DriveSchedule) -> EffectiveCouplings:
    """First-sideband coupling amplitudes on every chain link.

    nn[n-1] is the amplitude of the |psi_{n+1}><psi_n| term and nnn[n-1]
    that of |psi_n><psi_{n+2}|; which Bessel order and phase sign apply
    depends on the sublattice n mod 3.
    """
    n = device.n_qubits
    if schedule.n_qubits != n:
        raise ValueError("schedule length does not match device")
    g = device.g
    a = schedule.alpha
    th = schedule.theta
    nn = np.zeros(n - 1, dtype=complex)
    for i in range(n - 1):  # link between sites n = i+1 and n+1
        site = i + 1
        if site % 3 in (1, 2):
            nn[i] = g * bessel_j(0, a[i]) * bessel_j(1, a[i + 1]) * np.exp(1j * th[i + 1])
        else:
            nn[i] = g * bessel_j(0, a[i]) * bessel_j(-1, a[i + 1]) * np.exp(-1j * th[i + 1])
    nnn = np.zeros(max(n - 2, 0), dtype=complex)
    for i in range(n - 2):  # link between sites n = i+1 and n+2
        site = i + 1
        if site % 3 == 1:
            nnn[i] = g * bessel_j(0, a[i + 2]) * bessel_j(-1, a[i]) * np.exp(-1j * th[i])
        else:
            nnn[i] = g * bessel_j(0, a[i + 2]) * bessel_j(1, a[i]) * np.exp(1j * th[i])
    return EffectiveCouplings(nn=nn, nnn=nnn)


def effective_hamiltonian(couplings: EffectiveCouplings) -> np.ndarray:
    """Assemble the static single-excitation matrix from the link amplitudes.

    With the schedule from make_schedule this equals build_zigzag with
    J = g*J0(alpha)*J1(alpha) and the same phi.
    """
    n = couplings.n_qubits
    upper = np.zeros((n, n), dtype=complex)
    for i, amp in enumerate(couplings.nn):
        upper[i, i + 1] = np.conj(amp)  # <psi_n|H|psi_{n+1}> = conj(J_{n,n+1})
    for i, amp in enumerate(couplings.nnn):
        upper[i, i + 2] = amp  # <psi_n|H|psi_{n+2}> = J_{n+2,n}
    return hermitian_from_upper(upper)


def effective_coupling_strength(g: float, alpha: float) -> float:
    """Uniform |J| = g*J0(alpha)*J1(alpha) for equal alphas."""
    return g * bessel_j(0, alpha) * bessel_j(1, alpha)


def matched_lattice(device: DeviceSpec, phi: float, alpha: float) -> LatticeSpec:
    """LatticeSpec whose zigzag matrix the drive reproduces."""
    return LatticeSpec(
        n_sites=device.n_qubits,
        coupling=effective_coupling_strength(device.g, alpha),
        phi=phi,
        boundary="open",
    )


def chain_links(n_qubits: int):
    """(m, n) 1-based pairs with |m - n| in {1, 2} on the open chain, m > n."""
    for n in range(1, n_qubits):
        yield n + 1, n
    for n in range(1, n_qubits - 1):
        yield n + 2, n


def interaction_hamiltonian_at(t: float, device: DeviceSpec, schedule: DriveSchedule) -> np.ndarray:
    """Exact interaction-picture matrix at time t (no rotating-wave step).

    Element <psi_m|H|psi_n> = g * exp(i*(chi_m - chi_n)) on coupled pairs,
    where chi_n(t) = omega_bar_n*t + alpha_n*(sin(nu_n*t + theta_n) -
    sin(theta_n)).  The -sin(theta_n) anchor makes chi_n(0) = 0, so the
    frame coincides with the lab frame at t = 0.  Central frequencies enter
    only through pairwise differences, keeping the global-offset gauge
    freedom exact.
    """
    n = device.n_qubits
    if schedule.n_qubits != n:
        raise ValueError("schedule length does not match device")
    a = schedule.alpha
    wobble = a * (np.sin(schedule.nu * t + schedule.theta) - np.sin(schedule.theta))
    upper = np.zeros((n, n), dtype=complex)
    for m, k in chain_links(n):
        i, j = m - 1, k - 1
        dphase = (schedule.omega_bar[i] - schedule.omega_bar[j]) * t + wobble[i] - wobble[j]
        upper[j, i] = device.g * np.exp(-1j * dphase)  # <psi_k|H|psi_m> = conj of (m, k)
    return hermitian_from_upper(upper)
