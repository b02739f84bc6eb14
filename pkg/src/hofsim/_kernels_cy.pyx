# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled integrator kernels (Dormand-Prince 5(4)).

Same contract as hofsim._kernels_py; see that module for the basis and
Hamiltonian-source conventions.  The hot paths here are the per-step
Hamiltonian rebuild of the modulated chain and the banded commutator, both
written as flat C loops over preallocated buffers.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport sin, cos, sqrt, fabs

from .errors import StiffIntegrationError

cnp.import_array()

BACKEND_NAME = "cython"

ctypedef double complex cplx

cdef double SAFETY = 0.9
cdef double MIN_FACTOR = 0.2
cdef double MAX_FACTOR = 10.0
cdef double SAMPLE_SNAP = 1e-9
cdef double JUMP_NORM_TOL = 1e-12

# Dormand-Prince tableau (C7 nodes, row-packed A, 5th-order weights, error weights).
cdef double[7] C_NODES = [0.0, 1.0/5.0, 3.0/10.0, 4.0/5.0, 8.0/9.0, 1.0, 1.0]
cdef double[6][6] A_COEF = [
    [1.0/5.0, 0, 0, 0, 0, 0],
    [3.0/40.0, 9.0/40.0, 0, 0, 0, 0],
    [44.0/45.0, -56.0/15.0, 32.0/9.0, 0, 0, 0],
    [19372.0/6561.0, -25360.0/2187.0, 64448.0/6561.0, -212.0/729.0, 0, 0],
    [9017.0/3168.0, -355.0/33.0, 46732.0/5247.0, 49.0/176.0, -5103.0/18656.0, 0],
    [35.0/384.0, 0.0, 500.0/1113.0, 125.0/192.0, -2187.0/6784.0, 11.0/84.0],
]
cdef double[7] B5 = [35.0/384.0, 0.0, 500.0/1113.0, 125.0/192.0, -2187.0/6784.0, 11.0/84.0, 0.0]
cdef double[7] E_COEF = [71.0/57600.0, 0.0, -71.0/16695.0, 71.0/1920.0,
                         -17253.0/339200.0, 22.0/525.0, -1.0/40.0]


cdef struct HSpec:
    int mode            # 0 const, 1 drive
    int dim
    int n_links
    double g


cdef class _Work:
    """Per-propagation scratch: Hamiltonian description and RK buffers."""
    cdef HSpec spec
    cdef cplx[:, ::1] h_const
    cdef long[::1] link_m
    cdef long[::1] link_n
    cdef double[::1] link_dw
    cdef double[::1] q_alpha
    cdef double[::1] q_nu
    cdef double[::1] q_theta
    cdef double[::1] q_sin_theta
    cdef double[::1] wobble
    cdef cplx[::1] amp            # per-link amplitude at the current eval time
    # rates
    cdef double gamma1
    cdef double gamma_phi
    cdef double[::1] decay        # state mode: per-component non-Hermitian decay
    cdef double[:, ::1] rates     # density mode: elementwise decay mask
    # RK stage buffers, sized n (state: dim, density: dim*dim)
    cdef cplx[:, ::1] k
    cdef cplx[::1] y_tmp
    cdef cplx[::1] y_new
    cdef cplx[::1] y_err


cdef _Work _make_work(int mode, cnp.ndarray h_const, cnp.ndarray link_m,
                      cnp.ndarray link_n, cnp.ndarray link_dw, double g,
                      cnp.ndarray q_alpha, cnp.ndarray q_nu, cnp.ndarray q_theta,
                      int dim, int n_flat, double gamma1, double gamma_phi,
                      bint density):
    cdef _Work w = _Work()
    w.spec.mode = mode
    w.spec.dim = dim
    w.spec.g = g
    w.h_const = np.ascontiguousarray(h_const, dtype=complex)
    w.link_m = np.ascontiguousarray(link_m, dtype=np.int64)
    w.link_n = np.ascontiguousarray(link_n, dtype=np.int64)
    w.link_dw = np.ascontiguousarray(link_dw, dtype=float)
    w.spec.n_links = w.link_m.shape[0]
    w.q_alpha = np.ascontiguousarray(q_alpha, dtype=float)
    w.q_nu = np.ascontiguousarray(q_nu, dtype=float)
    w.q_theta = np.ascontiguousarray(q_theta, dtype=float)
    w.q_sin_theta = np.sin(np.ascontiguousarray(q_theta, dtype=float))
    w.wobble = np.zeros(dim, dtype=float)
    w.amp = np.zeros(max(w.spec.n_links, 1), dtype=complex)
    w.gamma1 = gamma1
    w.gamma_phi = gamma_phi
    cdef int n_sites = dim - 1
    decay = np.full(dim, 0.25 * n_sites * gamma_phi)
    decay[1:] += 0.5 * gamma1
    w.decay = decay
    if density:
        rates = np.full((dim, dim), gamma1 + 2.0 * gamma_phi)
        rates[0, :] = 0.5 * gamma1 + gamma_phi
        rates[:, 0] = 0.5 * gamma1 + gamma_phi
        for i in range(1, dim):
            rates[i, i] = gamma1
        rates[0, 0] = 0.0
        w.rates = rates
    else:
        w.rates = np.zeros((1, 1), dtype=float)
    w.k = np.zeros((7, n_flat), dtype=complex)
    w.y_tmp = np.zeros(n_flat, dtype=complex)
    w.y_new = np.zeros(n_flat, dtype=complex)
    w.y_err = np.zeros(n_flat, dtype=complex)
    return w


cdef inline void _update_amps(_Work w, double t) noexcept:
    """Per-link amplitudes g*exp(i*dchi) of the drive at time t."""
    cdef int i, m, n
    cdef double ph
    for i in range(1, w.spec.dim):
        w.wobble[i] = w.q_alpha[i] * (sin(w.q_nu[i] * t + w.q_theta[i]) - w.q_sin_theta[i])
    for i in range(w.spec.n_links):
        m = <int> w.link_m[i]
        n = <int> w.link_n[i]
        ph = w.link_dw[i] * t + w.wobble[m] - w.wobble[n]
        w.amp[i] = w.spec.g * (cos(ph) + 1j * sin(ph))


cdef void _rhs_state(_Work w, double t, cplx[::1] y, cplx[::1] out) noexcept:
    """out = -i H(t) y - decay * y."""
    cdef int i, j, m, n, dim = w.spec.dim
    cdef cplx acc, a
    if w.spec.mode == 0:
        for i in range(dim):
            acc = 0
            for j in range(dim):
                acc += w.h_const[i, j] * y[j]
            out[i] = -1j * acc
    else:
        for i in range(dim):
            out[i] = 0
        _update_amps(w, t)
        for i in range(w.spec.n_links):
            m = <int> w.link_m[i]
            n = <int> w.link_n[i]
            a = w.amp[i]
            out[m] += a * y[n]
            out[n] += a.conjugate() * y[m]
        for i in range(dim):
            out[i] *= -1j
    if w.gamma1 > 0.0 or w.gamma_phi > 0.0:
        for i in range(dim):
            out[i] -= w.decay[i] * y[i]


cdef void _rhs_density(_Work w, double t, cplx[::1] y, cplx[::1] out) noexcept:
    """out = -i[H, rho] - rates∘rho + gamma1 * (sum_n rho_nn) |0><0|, flattened."""
    cdef int i, j, l, m, n, dim = w.spec.dim
    cdef cplx a, ac
    cdef double pump
    cdef cplx acc
    if w.spec.mode == 0:
        # dense commutator
        for i in range(dim):
            for j in range(dim):
                acc = 0
                for l in range(dim):
                    acc += w.h_const[i, l] * y[l * dim + j] - y[i * dim + l] * w.h_const[l, j]
                out[i * dim + j] = -1j * acc
    else:
        for i in range(dim * dim):
            out[i] = 0
        _update_amps(w, t)
        for l in range(w.spec.n_links):
            m = <int> w.link_m[l]
            n = <int> w.link_n[l]
            a = w.amp[l]
            ac = a.conjugate()
            for j in range(dim):
                # H rho rows m, n
                out[m * dim + j] += a * y[n * dim + j]
                out[n * dim + j] += ac * y[m * dim + j]
                # -(rho H) columns n, m
                out[j * dim + n] -= y[j * dim + m] * a
                out[j * dim + m] -= y[j * dim + n] * ac
        for i in range(dim * dim):
            out[i] *= -1j
    if w.gamma1 > 0.0 or w.gamma_phi > 0.0:
        for i in range(dim):
            for j in range(dim):
                out[i * dim + j] -= w.rates[i, j] * y[i * dim + j]
        pump = 0.0
        for i in range(1, dim):
            pump += y[i * dim + i].real
        out[0] += w.gamma1 * pump


cdef double _attempt_step(_Work w, bint density, double t, cplx[::1] y,
                          double h, double rtol, double atol) noexcept:
    """One DP45 trial from (t, y) with k[0] preloaded; fills y_new/k[6].

    Returns the scaled error norm; y_new holds the 5th-order result and
    k[6] its RHS (FSAL candidate).
    """
    cdef int n = y.shape[0]
    cdef int stage, i, j
    cdef cplx acc
    cdef double err = 0.0, scale, mag0, mag1, e
    for stage in range(1, 7):
        for i in range(n):
            acc = 0
            for j in range(stage):
                if A_COEF[stage - 1][j] != 0.0:
                    acc += A_COEF[stage - 1][j] * w.k[j, i]
            w.y_tmp[i] = y[i] + h * acc
        if density:
            _rhs_density(w, t + C_NODES[stage] * h, w.y_tmp, w.k[stage])
        else:
            _rhs_state(w, t + C_NODES[stage] * h, w.y_tmp, w.k[stage])
    for i in range(n):
        acc = 0
        for j in range(6):
            if B5[j] != 0.0:
                acc += B5[j] * w.k[j, i]
        w.y_new[i] = y[i] + h * acc
        acc = 0
        for j in range(7):
            if E_COEF[j] != 0.0:
                acc += E_COEF[j] * w.k[j, i]
        w.y_err[i] = h * acc
    # k[6] = f(t+h, y_new) was computed as the last stage (C_NODES[6] = 1,
    # A row 6 equals B5), so it is already the FSAL derivative.
    for i in range(n):
        mag0 = sqrt(y[i].real * y[i].real + y[i].imag * y[i].imag)
        mag1 = sqrt(w.y_new[i].real * w.y_new[i].real + w.y_new[i].imag * w.y_new[i].imag)
        scale = atol + rtol * (mag0 if mag0 > mag1 else mag1)
        e = sqrt(w.y_err[i].real * w.y_err[i].real + w.y_err[i].imag * w.y_err[i].imag) / scale
        err += e * e
    return sqrt(err / n)


cdef inline double _step_factor(double err) noexcept:
    cdef double f
    if err == 0.0:
        return MAX_FACTOR
    f = SAFETY * err ** -0.2
    if f > MAX_FACTOR:
        f = MAX_FACTOR
    if f < MIN_FACTOR:
        f = MIN_FACTOR
    return f


cdef double _norm2(cplx[::1] y) noexcept:
    cdef double s = 0.0
    cdef int i
    for i in range(y.shape[0]):
        s += y[i].real * y[i].real + y[i].imag * y[i].imag
    return s


cdef void _single_step(_Work w, bint density, double t, cplx[::1] y0,
                       double h, cplx[::1] out) noexcept:
    """Plain 5th-order step (no error control), used by jump bisection."""
    cdef int n = y0.shape[0]
    cdef int stage, i, j
    cdef cplx acc
    if density:
        _rhs_density(w, t, y0, w.k[0])
    else:
        _rhs_state(w, t, y0, w.k[0])
    for stage in range(1, 7):
        for i in range(n):
            acc = 0
            for j in range(stage):
                if A_COEF[stage - 1][j] != 0.0:
                    acc += A_COEF[stage - 1][j] * w.k[j, i]
            w.y_tmp[i] = y0[i] + h * acc
        if density:
            _rhs_density(w, t + C_NODES[stage] * h, w.y_tmp, w.k[stage])
        else:
            _rhs_state(w, t + C_NODES[stage] * h, w.y_tmp, w.k[stage])
    for i in range(n):
        acc = 0
        for j in range(6):
            if B5[j] != 0.0:
                acc += B5[j] * w.k[j, i]
        out[i] = y0[i] + h * acc


def propagate_state(int mode, h_const, link_m, link_n, link_dw, double g,
                    q_alpha, q_nu, q_theta, psi0, int n_samples, double dt_sample,
                    double rtol, double atol, double max_step,
                    double gamma1, double gamma_phi, rng):
    """Propagate a state vector; see hofsim._kernels_py.propagate_state."""
    if n_samples < 1:
        raise ValueError("need at least one sample interval")
    if not (dt_sample > 0.0 and max_step > 0.0):
        raise ValueError("dt_sample and max_step must be positive")
    psi = np.array(psi0, dtype=complex)
    cdef int dim = psi.shape[0]
    cdef _Work w = _make_work(mode, np.asarray(h_const), link_m, link_n, link_dw, g,
                              q_alpha, q_nu, q_theta, dim, dim, gamma1, gamma_phi, False)
    out_arr = np.empty((n_samples + 1, dim), dtype=complex)
    cdef cplx[:, ::1] out = out_arr
    cdef cplx[::1] y = psi
    cdef cplx[::1] y_jump = np.empty(dim, dtype=complex)
    cdef cplx[::1] y_bis = np.empty(dim, dtype=complex)
    cdef bint dissipative = gamma1 > 0.0 or gamma_phi > 0.0
    cdef double threshold = 0.0
    if dissipative:
        threshold = rng.random()
    cdef double t = 0.0, h, h_try, err, target, snap, norm2, nrm, lo, hi, mid, h_floor
    cdef int sample, i, it
    cdef bint clamped
    snap = SAMPLE_SNAP * dt_sample
    h = 0.1 * (max_step if max_step < dt_sample else dt_sample)
    nrm = sqrt(_norm2(y))
    for i in range(dim):
        out[0, i] = y[i] / nrm if dissipative else y[i]
    _rhs_state(w, 0.0, y, w.k[0])
    for sample in range(1, n_samples + 1):
        target = sample * dt_sample
        while t < target - snap:
            if h > max_step:
                h = max_step
            clamped = t + h > target
            h_try = target - t if clamped else h
            h_floor = 4e-16 * fabs(t)
            if h_floor < 1e-18:
                h_floor = 1e-18
            if h_try < h_floor:
                raise StiffIntegrationError(t)
            err = _attempt_step(w, False, t, y, h_try, rtol, atol)
            if err > 1.0:
                h = h_try * _step_factor(err)
                continue
            if not dissipative:
                nrm = sqrt(_norm2(w.y_new))
                t += h_try
                for i in range(dim):
                    y[i] = w.y_new[i] / nrm
                _rhs_state(w, t, y, w.k[0])
                if not clamped:
                    h = h_try * _step_factor(err)
                continue
            norm2 = _norm2(w.y_new)
            if norm2 >= threshold:
                t += h_try
                for i in range(dim):
                    y[i] = w.y_new[i]
                    w.k[0, i] = w.k[6, i]
                if not clamped:
                    h = h_try * _step_factor(err)
                continue
            # jump inside (t, t+h_try]: bisect survival probability to threshold
            lo = 0.0
            hi = h_try
            for i in range(dim):
                y_jump[i] = w.y_new[i]
            for it in range(200):
                if fabs(_norm2(y_jump) - threshold) <= JUMP_NORM_TOL:
                    break
                mid = 0.5 * (lo + hi)
                if mid == lo or mid == hi:
                    break
                _single_step(w, False, t, y, mid, y_bis)
                if _norm2(y_bis) < threshold:
                    hi = mid
                    for i in range(dim):
                        y_jump[i] = y_bis[i]
                else:
                    lo = mid
            t += hi
            for i in range(dim):
                y[i] = y_jump[i]
            _apply_jump(w, y, rng)
            threshold = rng.random()
            _rhs_state(w, t, y, w.k[0])
        t = target
        if dissipative:
            nrm = sqrt(_norm2(y))
            for i in range(dim):
                out[sample, i] = y[i] / nrm
        else:
            for i in range(dim):
                out[sample, i] = y[i]
    return out_arr


cdef void _apply_jump(_Work w, cplx[::1] y, rng):
    """Collapse on one channel: site relaxation or site dephasing."""
    cdef int dim = w.spec.dim
    cdef int n_sites = dim - 1
    cdef int n, i
    cdef double total = 0.0, deph_w, acc, pick, mag, nrm
    cdef cplx phase
    deph_w = 0.5 * w.gamma_phi * _norm2(y)
    for n in range(1, dim):
        total += w.gamma1 * (y[n].real * y[n].real + y[n].imag * y[n].imag)
    total += n_sites * deph_w
    pick = rng.random() * total
    acc = 0.0
    for n in range(1, dim):
        acc += w.gamma1 * (y[n].real * y[n].real + y[n].imag * y[n].imag)
        if pick < acc:
            mag = sqrt(y[n].real * y[n].real + y[n].imag * y[n].imag)
            phase = y[n] / mag if mag > 0.0 else 1.0
            for i in range(dim):
                y[i] = 0
            y[0] = phase
            return
    for n in range(1, dim):
        acc += deph_w
        if pick < acc or n == n_sites:
            for i in range(dim):
                y[i] = -y[i]
            y[n] = -y[n]
            nrm = sqrt(_norm2(y))
            for i in range(dim):
                y[i] /= nrm
            return


def propagate_density(int mode, h_const, link_m, link_n, link_dw, double g,
                      q_alpha, q_nu, q_theta, rho0, int n_samples, double dt_sample,
                      double rtol, double atol, double max_step,
                      double gamma1, double gamma_phi):
    """Propagate a density matrix; see hofsim._kernels_py.propagate_density."""
    if n_samples < 1:
        raise ValueError("need at least one sample interval")
    if not (dt_sample > 0.0 and max_step > 0.0):
        raise ValueError("dt_sample and max_step must be positive")
    rho = np.array(rho0, dtype=complex)
    cdef int dim = rho.shape[0]
    cdef int n_flat = dim * dim
    cdef _Work w = _make_work(mode, np.asarray(h_const), link_m, link_n, link_dw, g,
                              q_alpha, q_nu, q_theta, dim, n_flat, gamma1, gamma_phi, True)
    out_arr = np.empty((n_samples + 1, n_flat), dtype=complex)
    cdef cplx[:, ::1] out = out_arr
    flat = rho.reshape(-1)
    cdef cplx[::1] y = flat
    cdef double t = 0.0, h, h_try, err, target, snap, h_floor
    cdef int sample, i
    cdef bint clamped
    snap = SAMPLE_SNAP * dt_sample
    h = 0.1 * (max_step if max_step < dt_sample else dt_sample)
    for i in range(n_flat):
        out[0, i] = y[i]
    _rhs_density(w, 0.0, y, w.k[0])
    for sample in range(1, n_samples + 1):
        target = sample * dt_sample
        while t < target - snap:
            if h > max_step:
                h = max_step
            clamped = t + h > target
            h_try = target - t if clamped else h
            h_floor = 4e-16 * fabs(t)
            if h_floor < 1e-18:
                h_floor = 1e-18
            if h_try < h_floor:
                raise StiffIntegrationError(t)
            err = _attempt_step(w, True, t, y, h_try, rtol, atol)
            if err > 1.0:
                h = h_try * _step_factor(err)
                continue
            t += h_try
            for i in range(n_flat):
                y[i] = w.y_new[i]
                w.k[0, i] = w.k[6, i]
            if not clamped:
                h = h_try * _step_factor(err)
        t = target
        for i in range(n_flat):
            out[sample, i] = y[i]
    return out_arr.reshape(n_samples + 1, dim, dim)
