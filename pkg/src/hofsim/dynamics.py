"""Open-system propagation in the zero/one-excitation subspace.

The chain Hamiltonian conserves total excitation and every collapse
channel (relaxation, pure dephasing) maps the span of {|0...0>, one
excitation} into itself, so states live in dimension N+1: index 0 is the
vacuum, index n the excitation on site n.  That subspace restriction is
what makes the exact master equation affordable here; the trajectory
unraveling is kept alongside it as the sampling-based route.

Three engines share the same adaptive Dormand-Prince kernels (compiled or
pure Python, chosen in hofsim.backend):
  evolve_unitary       Schrodinger equation, renormalized each step;
  evolve_lindblad      exact master equation for the density matrix;
  evolve_trajectories  quantum-jump unraveling averaged over seeds.
"""

import math
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from . import backend
from .errors import StiffIntegrationError  # re-exported for callers
from .modulation import DeviceSpec, DriveSchedule, chain_links

__all__ = [
    "NoiseSpec",
    "TimeGrid",
    "TrajectoryConfig",
    "ConstantHamiltonian",
    "DriveHamiltonian",
    "StateSamples",
    "DensitySamples",
    "TrajectoryResult",
    "StiffIntegrationError",
    "NO_NOISE",
    "ground_superposition",
    "embed_lattice",
    "density_from_state",
    "sigma_minus_expectation",
    "evolve_unitary",
    "evolve_lindblad",
    "evolve_trajectories",
]

DRIVE_RESOLUTION_FACTOR = 20  # steps per fastest modulation cycle


@dataclass(frozen=True)
class NoiseSpec:
    """Relaxation time T1 and total dephasing time T2* (seconds)."""

    t1: float
    t2_star: float

    def __post_init__(self):
        if self.t1 <= 0.0 or self.t2_star <= 0.0:
            raise ValueError("T1 and T2* must be positive")
        if self.t2_star > 2.0 * self.t1 * (1.0 + 1e-12):
            raise ValueError("T2* must not exceed 2*T1 (negative pure dephasing)")

    @property
    def gamma1(self) -> float:
        return 1.0 / self.t1

    @property
    def gamma_phi(self) -> float:
        """Pure dephasing rate 1/T2* - 1/(2*T1), clipped at zero."""
        return max(0.0, 1.0 / self.t2_star - 0.5 / self.t1)


NO_NOISE = None  # sentinel: pass noise=None for closed-system trajectories


@dataclass(frozen=True)
class TimeGrid:
    """Horizon, sampling interval and integrator tolerances."""

    t_end: float
    dt_sample: float
    rtol: float = 1e-8
    atol: float = 1e-10
    max_step: Optional[float] = None

    def __post_init__(self):
        if self.t_end <= 0.0 or self.dt_sample <= 0.0:
            raise ValueError("t_end and dt_sample must be positive")
        if self.dt_sample > self.t_end * (1.0 + 1e-12):
            raise ValueError("dt_sample must not exceed t_end")

    @property
    def n_samples(self) -> int:
        return max(1, int(round(self.t_end / self.dt_sample)))

    def times(self) -> np.ndarray:
        return np.arange(self.n_samples + 1) * self.dt_sample


@dataclass(frozen=True)
class TrajectoryConfig:
    """Trajectory count and the base seed; stream i is seeded with (seed, i)."""

    count: int
    seed: int = 0

    def __post_init__(self):
        if self.count < 1:
            raise ValueError("trajectory count must be >= 1")


class ConstantHamiltonian:
    """Time-independent Hermitian matrix in the embedded basis."""

    def __init__(self, matrix: np.ndarray):
        matrix = np.asarray(matrix, dtype=complex)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise ValueError("expected a square matrix")
        if not np.all(np.isfinite(matrix)):
            raise ValueError("matrix has non-finite entries")
        self.matrix = matrix
        self.dim = matrix.shape[0]

    @property
    def fastest_frequency(self) -> float:
        return 0.0

    def kernel_args(self):
        empty_i = np.zeros(0, dtype=np.int64)
        empty_f = np.zeros(0, dtype=float)
        zeros = np.zeros(self.dim, dtype=float)
        return (0, self.matrix, empty_i, empty_i, empty_f, 0.0,
                zeros, zeros, zeros)


class DriveHamiltonian:
    """Exact interaction-picture Hamiltonian of the modulated chain.

    Embedded over N+1 levels; the vacuum row stays zero since the drive
    conserves excitation number.
    """

    def __init__(self, device: DeviceSpec, schedule: DriveSchedule):
        if schedule.n_qubits != device.n_qubits:
            raise ValueError("schedule length does not match device")
        self.device = device
        self.schedule = schedule
        self.dim = device.n_qubits + 1
        pairs = list(chain_links(device.n_qubits))
        self._link_m = np.array([m for m, _ in pairs], dtype=np.int64)
        self._link_n = np.array([n for _, n in pairs], dtype=np.int64)
        wb = schedule.omega_bar
        self._link_dw = np.array([wb[m - 1] - wb[n - 1] for m, n in pairs])
        self._q_alpha = np.concatenate(([0.0], schedule.alpha))
        self._q_nu = np.concatenate(([0.0], schedule.nu))
        self._q_theta = np.concatenate(([0.0], schedule.theta))

    @property
    def fastest_frequency(self) -> float:
        """Largest modulation/detuning frequency in Hz (cycles)."""
        return float(np.max(np.abs(self.schedule.nu))) / (2.0 * math.pi)

    def kernel_args(self):
        return (1, np.zeros((1, 1), dtype=complex), self._link_m, self._link_n,
                self._link_dw, self.device.g, self._q_alpha, self._q_nu,
                self._q_theta)


HamiltonianSource = Union[ConstantHamiltonian, DriveHamiltonian]


def _resolve_max_step(source: HamiltonianSource, grid: TimeGrid) -> float:
    fastest = source.fastest_frequency
    ceiling = 1.0 / (DRIVE_RESOLUTION_FACTOR * fastest) if fastest > 0.0 else grid.dt_sample
    if grid.max_step is not None:
        return min(grid.max_step, ceiling)
    return ceiling


@dataclass(frozen=True)
class StateSamples:
    times: np.ndarray
    states: np.ndarray = field(repr=False)  # (n_samples + 1, dim)


@dataclass(frozen=True)
class DensitySamples:
    times: np.ndarray
    rhos: np.ndarray = field(repr=False)  # (n_samples + 1, dim, dim)


@dataclass(frozen=True)
class TrajectoryResult:
    """Trajectory-averaged site observables with standard errors."""

    times: np.ndarray
    site: int
    count: int
    sigma_minus: np.ndarray = field(repr=False)
    sigma_minus_stderr: np.ndarray = field(repr=False)
    population: np.ndarray = field(repr=False)
    population_stderr: np.ndarray = field(repr=False)


def ground_superposition(n_sites: int, site: int) -> np.ndarray:
    """(|vacuum> + |excitation on site>)/sqrt(2) in the embedded basis."""
    if not 1 <= site <= n_sites:
        raise ValueError(f"site must be in 1..{n_sites}, got {site}")
    psi = np.zeros(n_sites + 1, dtype=complex)
    psi[0] = psi[site] = 1.0 / math.sqrt(2.0)
    return psi


def embed_lattice(h_sites: np.ndarray) -> np.ndarray:
    """Pad an N-site lattice matrix with the decoupled vacuum level."""
    h_sites = np.asarray(h_sites, dtype=complex)
    n = h_sites.shape[0]
    h = np.zeros((n + 1, n + 1), dtype=complex)
    h[1:, 1:] = h_sites
    return h


def density_from_state(psi: np.ndarray) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    return np.outer(psi, psi.conj())


def sigma_minus_expectation(state_or_rho: np.ndarray, site: int) -> complex:
    """<sigma_site^-> = conj(a_0) * a_site for kets, rho[site, 0] for matrices.

    This conjugation direction makes a component at energy E oscillate as
    exp(-i*E*t), which the spectroscopy axis convention reports at +E/2pi.
    """
    arr = np.asarray(state_or_rho)
    if not 1 <= site < arr.shape[-1]:
        raise ValueError(f"site {site} out of range for dimension {arr.shape[-1]}")
    if arr.ndim == 1:
        return complex(np.conj(arr[0]) * arr[site])
    if arr.ndim == 2:
        return complex(arr[site, 0])
    raise ValueError("expected a state vector or a density matrix")


def _check_state(psi: np.ndarray, dim: int) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    if psi.shape != (dim,):
        raise ValueError(f"state has dimension {psi.shape}, expected ({dim},)")
    norm = np.linalg.norm(psi)
    if abs(norm - 1.0) > 1e-10:
        raise ValueError(f"state norm {norm} deviates from 1 beyond 1e-10")
    return psi


def evolve_unitary(psi0: np.ndarray, source: HamiltonianSource, grid: TimeGrid) -> StateSamples:
    """Closed-system propagation sampled at multiples of dt_sample."""
    psi0 = _check_state(psi0, source.dim)
    states = backend.propagate_state(
        *source.kernel_args(), psi0, grid.n_samples, grid.dt_sample,
        grid.rtol, grid.atol, _resolve_max_step(source, grid),
        0.0, 0.0, None,
    )
    return StateSamples(times=grid.times(), states=states)


def evolve_lindblad(
    rho0: np.ndarray,
    source: HamiltonianSource,
    noise: Optional[NoiseSpec],
    grid: TimeGrid,
) -> DensitySamples:
    """Master-equation propagation in the embedded subspace.

    Collapse channels: sqrt(1/T1)*sigma_n^- and sqrt(gamma_phi/2)*sigma_n^z
    per site, reduced to their action on the zero/one-excitation block.
    """
    rho0 = np.asarray(rho0, dtype=complex)
    dim = source.dim
    if rho0.shape != (dim, dim):
        raise ValueError(f"density matrix has shape {rho0.shape}, expected {(dim, dim)}")
    if np.max(np.abs(rho0 - rho0.conj().T)) > 1e-10:
        raise ValueError("initial density matrix is not Hermitian")
    if abs(np.trace(rho0).real - 1.0) > 1e-8:
        raise ValueError("initial density matrix must have unit trace")
    g1 = noise.gamma1 if noise is not None else 0.0
    gp = noise.gamma_phi if noise is not None else 0.0
    rhos = backend.propagate_density(
        *source.kernel_args(), rho0, grid.n_samples, grid.dt_sample,
        grid.rtol, grid.atol, _resolve_max_step(source, grid), g1, gp,
    )
    return DensitySamples(times=grid.times(), rhos=rhos)


def evolve_trajectories(
    psi0: np.ndarray,
    source: HamiltonianSource,
    noise: Optional[NoiseSpec],
    grid: TimeGrid,
    cfg: TrajectoryConfig,
    site: int,
) -> TrajectoryResult:
    """Quantum-jump average of <sigma_site^-> and the site population.

    Trajectory i evolves under the deterministic stream seeded with
    (cfg.seed, i); the reduction runs in index order, so results are
    independent of any outer parallelism.
    """
    psi0 = _check_state(psi0, source.dim)
    if not 1 <= site < source.dim:
        raise ValueError(f"site {site} out of range")
    g1 = noise.gamma1 if noise is not None else 0.0
    gp = noise.gamma_phi if noise is not None else 0.0
    args = source.kernel_args()
    max_step = _resolve_max_step(source, grid)
    n_out = grid.n_samples + 1
    sum_sm = np.zeros(n_out, dtype=complex)
    sumsq_sm = np.zeros(n_out, dtype=float)  # |obs|^2 accumulates Re and Im spread
    sum_p = np.zeros(n_out, dtype=float)
    sumsq_p = np.zeros(n_out, dtype=float)
    for index in range(cfg.count):
        rng = np.random.default_rng([cfg.seed, index])
        states = backend.propagate_state(
            *args, psi0, grid.n_samples, grid.dt_sample,
            grid.rtol, grid.atol, max_step, g1, gp, rng,
        )
        obs = np.conj(states[:, 0]) * states[:, site]
        pop = np.abs(states[:, site]) ** 2
        sum_sm += obs
        sumsq_sm += np.abs(obs) ** 2
        sum_p += pop
        sumsq_p += pop**2
    count = cfg.count
    mean_sm = sum_sm / count
    mean_p = sum_p / count
    if count > 1:
        var_sm = np.maximum(0.0, (sumsq_sm - count * np.abs(mean_sm) ** 2) / (count - 1))
        var_p = np.maximum(0.0, (sumsq_p - count * mean_p**2) / (count - 1))
        se_sm = np.sqrt(var_sm / count)
        se_p = np.sqrt(var_p / count)
    else:
        se_sm = np.zeros(n_out)
        se_p = np.zeros(n_out)
    return TrajectoryResult(
        times=grid.times(), site=site, count=count,
        sigma_minus=mean_sm, sigma_minus_stderr=se_sm,
        population=mean_p, population_stderr=se_p,
    )
