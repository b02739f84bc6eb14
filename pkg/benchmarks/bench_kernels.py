#!/usr/bin/env python3
"""Compare the compiled and pure-Python integrator kernels.

Times the three hot workloads on a representative spectroscopy cell
(modulated chain, reference parameters) and prints one table row per case.

Usage: python benchmarks/bench_kernels.py [--quick]
"""

import argparse
import math
import time

import numpy as np

import hofsim._kernels_py as kernels_py
from hofsim import dynamics as dyn
from hofsim import modulation as mod

try:
    import hofsim._kernels_cy as kernels_cy
except ImportError:
    kernels_cy = None


def build_cell(n_qubits: int):
    device = mod.DeviceSpec(n_qubits=n_qubits, g=2.0 * math.pi * 10e6)
    schedule = mod.make_schedule(device, 2.0 * math.pi / 120.0, 1.0)
    source = dyn.DriveHamiltonian(device, schedule)
    noise = dyn.NoiseSpec(t1=20e-6, t2_star=2e-6)
    return source, noise


def run_case(kern, name, source, noise, t_end, dt_sample):
    n_samples = int(round(t_end / dt_sample))
    max_step = 1.0 / (20.0 * source.fastest_frequency)
    psi0 = dyn.ground_superposition(source.dim - 1, 1)
    args = source.kernel_args()
    start = time.perf_counter()
    if name == "unitary":
        kern.propagate_state(*args, psi0, n_samples, dt_sample,
                             1e-8, 1e-10, max_step, 0.0, 0.0, None)
    elif name == "trajectory":
        rng = np.random.default_rng([42, 0])
        kern.propagate_state(*args, psi0, n_samples, dt_sample,
                             1e-8, 1e-10, max_step, noise.gamma1, noise.gamma_phi, rng)
    else:
        rho0 = dyn.density_from_state(psi0)
        kern.propagate_density(*args, rho0, n_samples, dt_sample,
                               1e-8, 1e-10, max_step, noise.gamma1, noise.gamma_phi)
    return time.perf_counter() - start


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--quick", action="store_true",
                        help="shorter horizon (0.2 us instead of 1 us)")
    parser.add_argument("--n", type=int, default=14, help="chain length")
    args = parser.parse_args()
    t_end = 0.2e-6 if args.quick else 1.0e-6
    source, noise = build_cell(args.n)
    print(f"# N = {args.n}, horizon = {t_end * 1e6:g} us, dt_sample = 2 ns")
    print(f"{'case':<12} {'python [s]':>12} {'cython [s]':>12} {'speedup':>9}")
    for case in ("unitary", "trajectory", "lindblad"):
        t_py = run_case(kernels_py, case, source, noise, t_end, 2e-9)
        if kernels_cy is None:
            print(f"{case:<12} {t_py:>12.3f} {'(missing)':>12} {'-':>9}")
            continue
        t_cy = run_case(kernels_cy, case, source, noise, t_end, 2e-9)
        print(f"{case:<12} {t_py:>12.3f} {t_cy:>12.3f} {t_py / t_cy:>8.1f}x")


if __name__ == "__main__":
    main()
