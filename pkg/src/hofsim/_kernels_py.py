"""Pure-Python (NumPy) integrator kernels.

Reference implementation of the Dormand-Prince 5(4) propagators used for
state vectors, quantum trajectories and density matrices.  The compiled
module hofsim._kernels_cy exposes the same three entry points; which one a
process uses is decided once at import in hofsim.backend.

Basis convention for open-system modes: index 0 is the zero-excitation
state, index n >= 1 carries the excitation on site n.  Collapse channels
are per-site relaxation (rate gamma1) and pure dephasing (rate gamma_phi).

Hamiltonian sources:
  mode 0 - constant dense matrix h_const;
  mode 1 - modulated chain: links (m, n) carry g*exp(i*dchi_mn(t)) with
           dchi_mn = (omega_m - omega_n)*t + wobble_m - wobble_n and
           wobble_n = alpha_n*(sin(nu_n*t + theta_n) - sin(theta_n)).
"""

import numpy as np

from .errors import StiffIntegrationError

BACKEND_NAME = "python"

# Dormand-Prince 5(4) tableau.
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    np.array([]),
    np.array([1 / 5]),
    np.array([3 / 40, 9 / 40]),
    np.array([44 / 45, -56 / 15, 32 / 9]),
    np.array([19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]),
    np.array([9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]),
    np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84]),
]
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_ERR = np.array(
    [71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40]
)

_SAFETY = 0.9
_MIN_FACTOR = 0.2
_MAX_FACTOR = 10.0
_SAMPLE_SNAP = 1e-9  # fraction of dt_sample treated as "on the sample instant"
_JUMP_NORM_TOL = 1e-12


def _drive_hamiltonian(t, dim, link_m, link_n, link_dw, g, q_alpha, q_nu, q_theta, q_sin_theta):
    wobble = q_alpha * (np.sin(q_nu * t + q_theta) - q_sin_theta)
    h = np.zeros((dim, dim), dtype=complex)
    amps = g * np.exp(1j * (link_dw * t + wobble[link_m] - wobble[link_n]))
    h[link_m, link_n] = amps
    h[link_n, link_m] = np.conj(amps)
    return h


def _error_norm(diff, y0, y1, rtol, atol):
    scale = atol + rtol * np.maximum(np.abs(y0), np.abs(y1))
    return float(np.sqrt(np.mean((np.abs(diff) / scale) ** 2)))


def _step_factor(err):
    if err == 0.0:
        return _MAX_FACTOR
    return min(_MAX_FACTOR, max(_MIN_FACTOR, _SAFETY * err ** -0.2))


class _AdaptiveStepper:
    """Shared DP45 loop; subclasses provide rhs() and sample hooks."""

    def __init__(self, y0, n_samples, dt_sample, rtol, atol, max_step):
        if n_samples < 1:
            raise ValueError("need at least one sample interval")
        if not (dt_sample > 0.0 and max_step > 0.0):
            raise ValueError("dt_sample and max_step must be positive")
        self.y = np.array(y0, dtype=complex)
        self.n_samples = n_samples
        self.dt_sample = float(dt_sample)
        self.rtol = float(rtol)
        self.atol = float(atol)
        self.max_step = float(max_step)
        self.t = 0.0
        self.k1 = None  # FSAL cache

    def rhs(self, t, y):  # pragma: no cover - overridden
        raise NotImplementedError

    def _attempt(self, t, y, h, k1):
        """One DP45 trial step; returns (y5, err_norm, k7)."""
        k = [k1]
        for i in range(1, 7):
            yi = y + h * sum(a * ki for a, ki in zip(_A[i], k))
            k.append(self.rhs(t + _C[i] * h, yi))
        y5 = y + h * sum(b * ki for b, ki in zip(_B5, k) if b != 0.0)
        diff = h * sum(e * ki for e, ki in zip(_ERR, k) if e != 0.0)
        return y5, _error_norm(diff, y, y5, self.rtol, self.atol), k[6]

    def single_step(self, t, y, h):
        """5th-order step without error control (used by jump bisection)."""
        k = [self.rhs(t, y)]
        for i in range(1, 7):
            yi = y + h * sum(a * ki for a, ki in zip(_A[i], k))
            k.append(self.rhs(t + _C[i] * h, yi))
        return y + h * sum(b * ki for b, ki in zip(_B5, k) if b != 0.0)

    def on_accept(self, t0, h):
        """Hook after an accepted step (jump handling); may modify self.y/k1."""

    def run(self, out):
        out[0] = self.y
        snap = _SAMPLE_SNAP * self.dt_sample
        h = 0.1 * min(self.max_step, self.dt_sample)
        self.k1 = self.rhs(0.0, self.y)
        for sample in range(1, self.n_samples + 1):
            target = sample * self.dt_sample
            while self.t < target - snap:
                h = min(h, self.max_step)
                if self.t + h > target:
                    h_try = target - self.t
                else:
                    h_try = h
                if h_try < max(1e-18, 4e-16 * abs(self.t)):
                    raise StiffIntegrationError(self.t)
                y5, err, k7 = self._attempt(self.t, self.y, h_try, self.k1)
                if err <= 1.0:
                    t0 = self.t
                    self.t = t0 + h_try
                    self.y = y5
                    self.k1 = k7
                    self.on_accept(t0, h_try)
                    if h_try == h:
                        h = h_try * _step_factor(err)
                else:
                    h = h_try * _step_factor(err)
            self.t = target
            out[sample] = self.observe()
        return out

    def observe(self):
        return self.y


class _StateStepper(_AdaptiveStepper):
    """State-vector propagation: unitary when both rates vanish, otherwise a
    quantum-jump trajectory on the non-Hermitian Hamiltonian."""

    def __init__(self, h_of_t, y0, n_samples, dt_sample, rtol, atol, max_step,
                 gamma1, gamma_phi, rng):
        super().__init__(y0, n_samples, dt_sample, rtol, atol, max_step)
        self.h_of_t = h_of_t
        dim = self.y.shape[0]
        n_sites = dim - 1
        self.gamma1 = float(gamma1)
        self.gamma_phi = float(gamma_phi)
        self.dissipative = self.gamma1 > 0.0 or self.gamma_phi > 0.0
        decay = np.full(dim, 0.25 * n_sites * self.gamma_phi)
        decay[1:] += 0.5 * self.gamma1
        self.decay = decay if self.dissipative else None
        self.rng = rng
        self.threshold = rng.random() if self.dissipative else 0.0

    def rhs(self, t, y):
        dy = -1j * (self.h_of_t(t) @ y)
        if self.dissipative:
            dy -= self.decay * y
        return dy

    def _apply_jump(self):
        y = self.y
        n_sites = y.shape[0] - 1
        pops = np.abs(y[1:]) ** 2
        relax_w = self.gamma1 * pops
        deph_w = 0.5 * self.gamma_phi * float(np.vdot(y, y).real)
        # accumulate exactly like the selection loop below so the drawn
        # point can never land past the final partial sum
        total = 0.0
        for w in relax_w:
            total += float(w)
        for _ in range(n_sites):
            total += deph_w
        pick = self.rng.random() * total
        acc = 0.0
        for n in range(n_sites):
            acc += float(relax_w[n])
            if pick < acc:
                phase = y[n + 1] / abs(y[n + 1]) if abs(y[n + 1]) > 0 else 1.0
                y[:] = 0.0
                y[0] = phase
                return
        for n in range(n_sites):
            acc += deph_w
            if pick < acc or n == n_sites - 1:
                y *= -1.0
                y[n + 1] *= -1.0
                y /= np.linalg.norm(y)
                return

    def run(self, out):
        """Stepping with jump interception (overrides the base loop)."""
        out[0] = self.observe()
        snap = _SAMPLE_SNAP * self.dt_sample
        h = 0.1 * min(self.max_step, self.dt_sample)
        self.k1 = self.rhs(0.0, self.y)
        for sample in range(1, self.n_samples + 1):
            target = sample * self.dt_sample
            while self.t < target - snap:
                h = min(h, self.max_step)
                h_try = target - self.t if self.t + h > target else h
                if h_try < max(1e-18, 4e-16 * abs(self.t)):
                    raise StiffIntegrationError(self.t)
                y5, err, k7 = self._attempt(self.t, self.y, h_try, self.k1)
                if err > 1.0:
                    h = h_try * _step_factor(err)
                    continue
                grow = h_try == h
                if not self.dissipative:
                    y5 /= np.linalg.norm(y5)
                    self.t += h_try
                    self.y = y5
                    self.k1 = self.rhs(self.t, self.y)
                    if grow:
                        h = h_try * _step_factor(err)
                    continue
                norm2 = float(np.vdot(y5, y5).real)
                if norm2 >= self.threshold:
                    self.t += h_try
                    self.y = y5
                    self.k1 = k7
                    if grow:
                        h = h_try * _step_factor(err)
                    continue
                # Jump inside this step: bisect on |psi(s)|^2 = threshold.
                t_jump, y_jump = self._bisect_jump(self.t, self.y, h_try, y5)
                self.t = t_jump
                self.y = y_jump
                self._apply_jump()
                self.threshold = self.rng.random()
                self.k1 = self.rhs(self.t, self.y)
            self.t = target
            out[sample] = self.observe()
        return out

    def _bisect_jump(self, t0, y0, h, y_full):
        lo, hi = 0.0, h
        y_hi = y_full
        for _ in range(200):
            norm2_hi = float(np.vdot(y_hi, y_hi).real)
            if abs(norm2_hi - self.threshold) <= _JUMP_NORM_TOL:
                break
            mid = 0.5 * (lo + hi)
            if mid == lo or mid == hi:
                break
            y_mid = self.single_step(t0, y0, mid)
            if float(np.vdot(y_mid, y_mid).real) < self.threshold:
                hi, y_hi = mid, y_mid
            else:
                lo = mid
        return t0 + hi, y_hi

    def observe(self):
        norm = np.linalg.norm(self.y)
        return self.y / norm if self.dissipative else self.y.copy()


class _DensityStepper(_AdaptiveStepper):
    """Lindblad propagation of the flattened density matrix."""

    def __init__(self, h_of_t, rho0, n_samples, dt_sample, rtol, atol, max_step,
                 gamma1, gamma_phi):
        dim = rho0.shape[0]
        super().__init__(rho0.reshape(-1), n_samples, dt_sample, rtol, atol, max_step)
        self.h_of_t = h_of_t
        self.dim = dim
        g1, gp = float(gamma1), float(gamma_phi)
        rates = np.full((dim, dim), g1 + 2.0 * gp)
        rates[0, :] = rates[:, 0] = 0.5 * g1 + gp
        idx = np.arange(1, dim)
        rates[idx, idx] = g1
        rates[0, 0] = 0.0
        self.rates = rates
        self.gamma1 = g1

    def rhs(self, t, y):
        rho = y.reshape(self.dim, self.dim)
        h = self.h_of_t(t)
        drho = -1j * (h @ rho - rho @ h)
        drho -= self.rates * rho
        drho[0, 0] += self.gamma1 * float(np.trace(rho).real - rho[0, 0].real)
        return drho.reshape(-1)

    def observe(self):
        return self.y.copy()


def _make_h_of_t(mode, h_const, link_m, link_n, link_dw, g, q_alpha, q_nu, q_theta, dim):
    if mode == 0:
        h = np.array(h_const, dtype=complex)
        return lambda t: h
    q_sin_theta = np.sin(q_theta)
    return lambda t: _drive_hamiltonian(
        t, dim, link_m, link_n, link_dw, g, q_alpha, q_nu, q_theta, q_sin_theta
    )


def propagate_state(mode, h_const, link_m, link_n, link_dw, g,
                    q_alpha, q_nu, q_theta, psi0, n_samples, dt_sample,
                    rtol, atol, max_step, gamma1, gamma_phi, rng):
    """Propagate a state vector; returns (n_samples + 1, dim) samples.

    Samples are taken at t = k*dt_sample and are normalized (for a
    dissipative trajectory the decayed norm only drives the jump clock).
    """
    psi0 = np.asarray(psi0, dtype=complex)
    h_of_t = _make_h_of_t(mode, h_const, link_m, link_n, link_dw, g,
                          q_alpha, q_nu, q_theta, psi0.shape[0])
    stepper = _StateStepper(h_of_t, psi0, n_samples, dt_sample, rtol, atol,
                            max_step, gamma1, gamma_phi, rng)
    out = np.empty((n_samples + 1, psi0.shape[0]), dtype=complex)
    return stepper.run(out)


def propagate_density(mode, h_const, link_m, link_n, link_dw, g,
                      q_alpha, q_nu, q_theta, rho0, n_samples, dt_sample,
                      rtol, atol, max_step, gamma1, gamma_phi):
    """Propagate a density matrix; returns (n_samples + 1, dim, dim) samples."""
    rho0 = np.asarray(rho0, dtype=complex)
    dim = rho0.shape[0]
    h_of_t = _make_h_of_t(mode, h_const, link_m, link_n, link_dw, g,
                          q_alpha, q_nu, q_theta, dim)
    stepper = _DensityStepper(h_of_t, rho0, n_samples, dt_sample, rtol, atol,
                              max_step, gamma1, gamma_phi)
    out = np.empty((n_samples + 1, dim * dim), dtype=complex)
    stepper.run(out)
    return out.reshape(n_samples + 1, dim, dim)
