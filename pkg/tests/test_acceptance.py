"""Acceptance suite: one test per criterion, one printed verdict line each.

Run with `pytest -s tests/test_acceptance.py` to see the verdict lines as
they happen.  Every tolerance below comes straight from the acceptance
criteria; nothing is tuned at runtime.

Criterion 5 is implemented exactly as stated and is expected to fail: the
first-order effective Hamiltonian misses second-order drive shifts of
order g^2/Delta (0.1-0.5 MHz here), which dephase well past the 2e-2
infidelity budget over 1 us at the reference parameters.  The analysis
lives in the decisions ledger; the spectroscopic criteria (7, 8), which
budget those same shifts in frequency units, do pass.
"""

import math
import subprocess
import sys
import time

import numpy as np
import pytest

from hofsim import dynamics as dyn
from hofsim import model
from hofsim import modulation as mod
from hofsim import spectroscopy as spec
from hofsim import sweep as sw
from hofsim.numerics import eig_hermitian

TWO_PI = 2.0 * math.pi
MHZ = TWO_PI * 1e6

REF_NOISE = dyn.NoiseSpec(t1=20e-6, t2_star=2e-6)
WORKERS = 2


def verdict(criterion, ok, detail):
    line = f"ACCEPTANCE {criterion}: {'PASS' if ok else 'FAIL'} - {detail}"
    print(line, flush=True)
    return ok


# ---------------------------------------------------------------- criterion 1

def test_criterion_1_exact_zigzag_butterfly():
    n = 300
    start = time.perf_counter()
    cfg = sw.SweepConfig(n_sites=n, model="zigzag", boundary="periodic",
                         flux_count=120, t1=None, t2_star=None)
    ds = sw.run_exact_sweep(cfg, threads=WORKERS)
    elapsed = time.perf_counter() - start

    trace_ok = all(abs(np.sum(r.eigenvalues)) <= 1e-9 * n for r in ds.rows)
    zero = ds.rows[0]
    extremes_ok = (abs(zero.eigenvalues[0] + 2.25) <= 1e-3
                   and abs(zero.eigenvalues[-1] - 4.0) <= 1e-3)

    by_flux = {}
    for row in ds.rows:
        by_flux[round(row.flux / TWO_PI, 9)] = row.eigenvalues
    mirror_dev = 0.0
    for turns, levels in by_flux.items():
        partner = round((1.0 - turns) % 1.0, 9)
        if partner in by_flux:
            mirror_dev = max(mirror_dev, float(np.max(np.abs(levels - by_flux[partner]))))
    mirror_ok = mirror_dev <= 1e-8

    runtime_ok = elapsed <= 120.0
    ok = trace_ok and extremes_ok and mirror_ok and runtime_ok
    assert verdict(1, ok, f"trace<=1e-9*N {trace_ok}; extremes(-2.25,4)+-1e-3 "
                          f"{extremes_ok}; flux-mirror dev {mirror_dev:.2e}<=1e-8 "
                          f"{mirror_ok}; runtime {elapsed:.1f}s<=120s {runtime_ok}")


# ---------------------------------------------------------------- criterion 2

def test_criterion_2_harper_reference():
    n = 300
    h = model.build_harper(n, coupling=1.0, flux=0.0, boundary="periodic")
    levels = np.sort(np.linalg.eigvalsh(h))
    expected = np.sort(2.0 * (1.0 + np.cos(TWO_PI * np.arange(n) / n)))
    spectrum_dev = float(np.max(np.abs(levels - expected)))
    trace_dev = abs(np.sum(levels) - 2.0 * n)
    ok = spectrum_dev <= 1e-9 and trace_dev <= 1e-9 * n
    assert verdict(2, ok, f"|spectrum - 2J(1+cos)| = {spectrum_dev:.2e} <= 1e-9; "
                          f"|trace - 2NJ| = {trace_dev:.2e}")


# ---------------------------------------------------------------- criterion 3

def test_criterion_3_band_real_space_equivalence():
    worst_spec = 0.0
    for q in (2, 3, 5):
        p = 1 if q == 2 else 2
        n = 3 * q * 3
        union = model.band_spectrum_union(n, p, q)
        phi = TWO_PI * p / (3 * q)
        real = np.sort(np.linalg.eigvalsh(model.build_zigzag(
            model.LatticeSpec(n_sites=n, phi=phi, boundary="periodic"))))
        worst_spec = max(worst_spec, float(np.max(np.abs(union - real))))
    worst_coupling = 0.0
    for q in (2, 3, 5):
        p = 1 if q == 2 else 2
        for k in np.linspace(-math.pi / q, math.pi / q, 9):
            bp = model.BandProblem(p=p, q=q, k=float(k))
            for v in range(q):
                got = abs(model.band_coupling(bp, v))
                want = math.sqrt(max(0.0, 2.0 + 2.0 * math.cos(3 * k + v * bp.flux)))
                worst_coupling = max(worst_coupling, abs(got - want))
    ok = worst_spec <= 1e-8 and worst_coupling <= 1e-12
    assert verdict(3, ok, f"band-vs-real max dev {worst_spec:.2e} <= 1e-8; "
                          f"|coupling| vs closed form {worst_coupling:.2e} <= 1e-12")


# ---------------------------------------------------------------- criterion 4

def test_criterion_4_effective_hamiltonian_identity():
    worst = 0.0
    for n in (3, 7, 14, 20):
        device = mod.DeviceSpec(n_qubits=n, g=10 * MHZ)
        scale = mod.effective_coupling_strength(device.g, 1.0)
        for phi in np.linspace(0.0, TWO_PI, 12, endpoint=False):
            schedule = mod.make_schedule(device, float(phi), 1.0)
            h_eff = mod.effective_hamiltonian(mod.effective_couplings(device, schedule))
            h_ref = model.build_zigzag(mod.matched_lattice(device, float(phi), 1.0))
            worst = max(worst, float(np.max(np.abs(h_eff - h_ref))) / scale)
    ok = worst <= 1e-12
    assert verdict(4, ok, f"entrywise |H_eff - H_zigzag| / J = {worst:.2e} <= 1e-12 "
                          f"for N <= 20, phi over [0, 2pi)")


# ---------------------------------------------------------------- criterion 5

def test_criterion_5_rwa_validity():
    device = mod.DeviceSpec(n_qubits=3, g=10 * MHZ)
    phi = TWO_PI / 120.0
    schedule = mod.make_schedule(device, phi, 1.0)
    source = dyn.DriveHamiltonian(device, schedule)
    t_end = 1e-6
    grid = dyn.TimeGrid(t_end=t_end, dt_sample=t_end, rtol=1e-10, atol=1e-12)
    h_eff = mod.effective_hamiltonian(mod.effective_couplings(device, schedule))
    dec = eig_hermitian(h_eff)
    worst = 0.0
    for site in (1, 2, 3):
        psi0 = np.zeros(4, dtype=complex)
        psi0[site] = 1.0
        exact = dyn.evolve_unitary(psi0, source, grid).states[-1][1:]
        coeff = dec.eigenvectors.conj().T @ psi0[1:]
        effective = dec.eigenvectors @ (np.exp(-1j * dec.eigenvalues * t_end) * coeff)
        infidelity = 1.0 - abs(np.vdot(effective, exact)) ** 2
        worst = max(worst, float(infidelity))
    ok = worst <= 2e-2
    assert verdict(5, ok, f"max infidelity over single-excitation starts = "
                          f"{worst:.3f} (budget 2e-2); second-order drive "
                          f"shifts ~g^2/Delta dominate, see decisions ledger")


# ---------------------------------------------------------------- criterion 6

def test_criterion_6_decoherence_analytics():
    source = dyn.ConstantHamiltonian(np.zeros((2, 2), dtype=complex))
    grid = dyn.TimeGrid(t_end=4e-6, dt_sample=4e-8)
    rho0 = dyn.density_from_state(dyn.ground_superposition(1, 1))
    out = dyn.evolve_lindblad(rho0, source, REF_NOISE, grid)
    got = np.array([dyn.sigma_minus_expectation(r, 1) for r in out.rhos])
    expected = 0.5 * np.exp(-out.times / REF_NOISE.t2_star)
    master_dev = float(np.max(np.abs(got - expected)))

    traj = dyn.evolve_trajectories(
        dyn.ground_superposition(1, 1), source, REF_NOISE, grid,
        dyn.TrajectoryConfig(count=2000, seed=20240811), site=1,
    )
    z_worst = 0.0
    for idx in (10, 25, 50, 75, 100):
        se = max(float(traj.sigma_minus_stderr[idx]), 1e-12)
        z = abs(traj.sigma_minus[idx] - expected[idx]) / se
        z_worst = max(z_worst, float(z))
    ok = master_dev <= 1e-6 and z_worst <= 3.0
    assert verdict(6, ok, f"master-equation dev {master_dev:.2e} <= 1e-6; "
                          f"trajectory max |z| = {z_worst:.2f} <= 3 (2000 traj, fixed seed)")


# ---------------------------------------------------------------- criterion 7

def test_criterion_7_noiseless_spectroscopy_oracle():
    n = 5
    device = mod.DeviceSpec(n_qubits=n, g=10 * MHZ)
    phi = TWO_PI / 120.0
    schedule = mod.make_schedule(device, phi, 1.0)
    source = dyn.DriveHamiltonian(device, schedule)
    grid = dyn.TimeGrid(t_end=4e-6, dt_sample=2e-9)
    records = [spec.record_run(site, source, grid, engine="unitary")
               for site in range(1, n + 1)]
    row = spec.spectrum_of(records, zero_pad_factor=4)
    peaks = spec.detect_peaks(row, rel_threshold=0.05)
    levels = spec.eigenenergies_reference(
        mod.matched_lattice(device, phi, 1.0)) / TWO_PI

    count_ok = len(peaks) == n
    worst = max(float(np.min(np.abs(peaks.frequencies - level))) for level in levels)
    match_ok = worst <= 0.5e6

    single = spec.detect_peaks(spec.spectrum_of([records[0]], zero_pad_factor=4),
                               rel_threshold=0.05)
    subset_ok = 0 < len(single) < len(peaks) and all(
        np.min(np.abs(peaks.frequencies - f)) <= row.bin_width for f in single.frequencies
    )
    ok = count_ok and match_ok and subset_ok
    assert verdict(7, ok, f"peaks {len(peaks)}=={n} {count_ok}; worst level match "
                          f"{worst / 1e6:.3f} MHz <= 0.5 {match_ok}; single-site "
                          f"strict subset ({len(single)} peaks) {subset_ok}")


# ---------------------------------------------------------------- criterion 8

@pytest.mark.slow
def test_criterion_8_full_scale_butterfly():
    cfg = sw.SweepConfig()  # dataclass defaults are the reference parameter set
    assert (cfg.n_sites, cfg.flux_count, cfg.engine) == (14, 120, "lindblad")
    assert cfg.t1 == 20e-6 and cfg.t2_star == 2e-6 and cfg.alpha == 1.0
    ds = sw.run_spectro_sweep(cfg, threads=WORKERS)
    report = sw.compare_to_theory(ds)
    core_seconds = float(sum(ds.row_seconds))

    rows_ok = all(err is None for err in ds.errors)
    levels0 = spec.eigenenergies_reference(cfg.effective_lattice(0.0)) / TWO_PI
    smallest = levels0[0]
    fd0 = report.per_flux[0]
    special_mask = np.isclose(fd0.matched_levels, smallest)
    special_devs = fd0.deviations[special_mask]
    special_ok = special_mask.any() and float(np.max(special_devs)) <= 1.5e6

    general_devs = [
        d for fd in report.per_flux
        for lvl, d in zip(fd.matched_levels, fd.deviations)
        if not (fd.flux == 0.0 and np.isclose(lvl, smallest))
    ]
    mean_ok = float(np.mean(general_devs)) <= 0.5e6
    budget_ok = core_seconds <= 8 * 30 * 60  # <= 30 minutes on 8 cores
    ok = rows_ok and special_ok and mean_ok and budget_ok
    assert verdict(8, ok, f"rows clean {rows_ok}; mean |dev| "
                          f"{np.mean(general_devs) / 1e6:.3f} MHz <= 0.5 {mean_ok}; "
                          f"Phi=0 smallest-level dev "
                          f"{np.max(special_devs) / 1e6 if special_mask.any() else float('nan'):.3f}"
                          f" MHz <= 1.5 {special_ok}; core-time {core_seconds:.0f}s "
                          f"<= 14400s {budget_ok}")


# ---------------------------------------------------------------- criterion 9

def test_criterion_9_bitwise_reproducibility(tmp_path):
    config = tmp_path / "repro.yaml"
    config.write_text(
        "model: {n: 3}\n"
        "time: {t_end_us: 0.3, dt_sample_ns: 4.0}\n"
        "sweep: {fluxes: 2}\n"
        "run: {seed: 99}\n"
    )
    outputs = {}
    for threads, tag in ((1, "a"), (2, "b"), (2, "c")):
        out = tmp_path / tag
        proc = subprocess.run(
            [sys.executable, "-m", "hofsim.cli", "butterfly-spectro",
             "--config", str(config), "--threads", str(threads),
             "--out-dir", str(out)],
            capture_output=True, text=True,
        )
        assert proc.returncode == 0, proc.stderr
        outputs[tag] = {
            name: next(out.glob(f"*/{name}")).read_bytes()
            for name in ("heatmap.csv", "peaks.csv", "deviations.csv")
        }
    same_threads = outputs["b"] == outputs["c"]
    cross_threads = outputs["a"] == outputs["b"]
    ok = same_threads and cross_threads
    assert verdict(9, ok, f"rerun identical {same_threads}; "
                          f"threads 1 vs 2 identical {cross_threads}")
