"""Command line front end.

Subcommands: butterfly-exact, butterfly-spectro, evolve, couplings.
Configuration comes from an optional YAML file plus flag overrides; every
physical quantity in the file carries laboratory units (MHz, GHz, us, ns).
Outputs land in <out_dir>/<config-hash-prefix>/; data goes to files or
stdout, progress strictly to stderr.

Exit codes: 0 success, 1 configuration error, 2 runtime error.
"""

import math
import sys
from pathlib import Path

import click
import numpy as np
import yaml

from . import __version__, backend
from . import dynamics as dyn
from . import model
from . import modulation as mod
from . import spectroscopy as spec
from . import sweep as sweep_mod
from .config import ConfigError, RunConfig


def _load_config(path):
    if path is None:
        return RunConfig.defaults()
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = yaml.safe_load(fh) or {}
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except yaml.YAMLError as exc:
        raise ConfigError(f"config file is not valid YAML: {exc}")
    return RunConfig.from_dict(data)


def _apply_overrides(cfg: RunConfig, overrides) -> RunConfig:
    for section, key, value in overrides:
        if value is not None:
            cfg = cfg.override(section, key, value)
    return cfg


def _resolve_threads(cfg: RunConfig) -> int:
    threads = cfg.get("run", "threads")
    if threads == 0:
        import os

        threads = os.cpu_count() or 1
    return threads


def _run_dir(cfg: RunConfig, label: str) -> Path:
    """Per-run directory: command label + config hash (+ per-run suffix)."""
    out = Path(cfg.get("run", "out_dir")) / f"{label}-{cfg.run_id()}"
    out.mkdir(parents=True, exist_ok=True)
    return out


def _schedule_summary(cfg: RunConfig) -> dict:
    base = [float(f) for f in cfg.get("device", "base_ghz")]
    nu_ghz = (base[0] - base[2], base[0] - base[1], base[1] - base[2])
    return {
        "base_ghz": base,
        "nu_mhz": [round(n * 1e3, 9) for n in nu_ghz],
        "alpha": float(cfg.get("device", "alpha")),
        "theta_rule": "pi - n*phi on sublattice n=1 (mod 3), n*phi otherwise",
    }


def _write_manifest(run_dir: Path, cfg: RunConfig, rows, outputs, extra=None) -> Path:
    doc = {
        "config": cfg.to_dict(),
        "config_hash": cfg.config_hash(),
        "package": {"name": "hofsim", "version": __version__, "backend": backend.BACKEND},
        "schedule": _schedule_summary(cfg),
        "rows": rows,
        "outputs": sorted(outputs),
    }
    if extra:
        doc.update(extra)
    path = run_dir / "manifest.yaml"
    with open(path, "w", encoding="utf-8") as fh:
        yaml.safe_dump(doc, fh, sort_keys=True)
    return path


def _row_entries(ds: sweep_mod.ButterflyDataset) -> list:
    rows = []
    for i, flux in enumerate(ds.flux_values):
        entry = {
            "index": i,
            "flux_over_2pi": float(flux) / (2.0 * math.pi),
            "seconds": round(float(ds.row_seconds[i]), 6),
            "error": ds.errors[i],
        }
        if ds.variant == "exact" and ds.rows[i] is not None:
            entry["flux_over_2pi_used"] = float(ds.rows[i].flux) / (2.0 * math.pi)
        rows.append(entry)
    return rows


def _progress_printer(label: str, per_row: int = 1):
    def report(done: int, total: int):
        if done % per_row == 0 or done == total:
            click.echo(f"{label}: {done // per_row}/{total // per_row} rows", err=True)

    return report


common_options = [
    click.option("--config", "config_path", type=click.Path(), default=None,
                 help="YAML config file (built-in defaults are the reference parameter set)."),
    click.option("--seed", type=int, default=None, help="Override run.seed."),
    click.option("--threads", type=int, default=None,
                 help="Worker processes; 0 = all cores; 1 = serial."),
    click.option("--out-dir", type=click.Path(), default=None, help="Output root."),
]


def _with_common(fn):
    for opt in reversed(common_options):
        fn = opt(fn)
    return fn


@click.group()
@click.version_option(version=__version__, prog_name="hofsim")
def cli():
    """Simulate Hofstadter butterflies on modulated zigzag qubit chains."""


@cli.command("butterfly-exact")
@_with_common
@click.option("--model", "variant", type=click.Choice(["zigzag", "harper"]), default=None)
@click.option("--n", type=int, default=None, help="Number of sites.")
@click.option("--boundary", type=click.Choice(["open", "periodic"]), default=None)
@click.option("--fluxes", type=int, default=None, help="Flux grid size over [0, 2*pi).")
def butterfly_exact(config_path, seed, threads, out_dir, variant, n, boundary, fluxes):
    """Exact eigenvalue butterfly (diagonalization only)."""
    cfg = _apply_overrides(_load_config(config_path), [
        ("run", "seed", seed), ("run", "threads", threads), ("run", "out_dir", out_dir),
        ("model", "variant", variant), ("model", "n", n),
        ("model", "boundary", boundary), ("sweep", "fluxes", fluxes),
    ])
    run_dir = _run_dir(cfg, "exact")
    ds = sweep_mod.run_exact_sweep(
        cfg.to_sweep_config(), threads=_resolve_threads(cfg),
        progress=_progress_printer("exact"),
    )
    csv_path = run_dir / "exact.csv"
    sweep_mod.write_exact_csv(csv_path, ds)
    manifest = _write_manifest(run_dir, cfg, _row_entries(ds), [csv_path.name])
    click.echo(str(csv_path))
    click.echo(str(manifest))


@cli.command("butterfly-spectro")
@_with_common
@click.option("--n", type=int, default=None, help="Number of qubits.")
@click.option("--fluxes", type=int, default=None)
@click.option("--engine", type=click.Choice(list(spec.ENGINES)), default=None)
@click.option("--trajectories", "traj_count", type=int, default=None,
              help="Trajectory count (trajectories engine).")
@click.option("--no-noise", is_flag=True, default=False, help="Disable T1/T2* noise.")
def butterfly_spectro(config_path, seed, threads, out_dir, n, fluxes, engine,
                      traj_count, no_noise):
    """Spectroscopic butterfly from simulated time evolutions."""
    overrides = [
        ("run", "seed", seed), ("run", "threads", threads), ("run", "out_dir", out_dir),
        ("model", "n", n), ("sweep", "fluxes", fluxes), ("sweep", "engine", engine),
        ("trajectories", "count", traj_count),
    ]
    if no_noise:
        overrides.append(("noise", "enabled", False))
    cfg = _apply_overrides(_load_config(config_path), overrides)
    run_dir = _run_dir(cfg, "spectro")
    n_sites = cfg.get("model", "n")
    ds = sweep_mod.run_spectro_sweep(
        cfg.to_sweep_config(), threads=_resolve_threads(cfg),
        progress=_progress_printer("spectro", per_row=n_sites),
    )
    report = sweep_mod.compare_to_theory(ds)
    heatmap = run_dir / "heatmap.csv"
    peaks = run_dir / "peaks.csv"
    deviations = run_dir / "deviations.csv"
    sweep_mod.write_heatmap_csv(heatmap, ds)
    sweep_mod.write_peaks_csv(peaks, ds)
    sweep_mod.write_deviations_csv(deviations, report)
    manifest = _write_manifest(
        run_dir, cfg, _row_entries(ds),
        [heatmap.name, peaks.name, deviations.name],
        extra={"deviation_summary": {
            "mean_abs_mhz": report.mean_abs / 1e6,
            "max_abs_mhz": report.max_abs / 1e6,
            "n_peaks": report.n_peaks,
            "n_unmatched_levels": report.n_unmatched_levels,
        }},
    )
    for path in (heatmap, peaks, deviations, manifest):
        click.echo(str(path))


@cli.command("evolve")
@_with_common
@click.option("--n", type=int, default=None, help="Number of qubits.")
@click.option("--site", type=int, default=1, help="Initially excited site (1..N).")
@click.option("--flux", "flux_over_2pi", type=float, default=1.0 / 40.0,
              help="Phi/2pi for this run (default corresponds to phi/2pi = 1/120).")
@click.option("--engine", type=click.Choice(list(spec.ENGINES)), default=None)
@click.option("--no-noise", is_flag=True, default=False)
def evolve(config_path, seed, threads, out_dir, n, site, flux_over_2pi, engine, no_noise):
    """Single (flux, site) time evolution and its spectrum."""
    overrides = [
        ("run", "seed", seed), ("run", "threads", threads), ("run", "out_dir", out_dir),
        ("model", "n", n), ("sweep", "engine", engine),
    ]
    if no_noise:
        overrides.append(("noise", "enabled", False))
    cfg = _apply_overrides(_load_config(config_path), overrides)
    scfg = cfg.to_sweep_config()
    if not 1 <= site <= scfg.n_sites:
        raise ConfigError(f"--site must be in 1..{scfg.n_sites}, got {site}")
    flux = flux_over_2pi * 2.0 * math.pi
    source = dyn.DriveHamiltonian(scfg.device(), scfg.schedule_for(flux))
    trajectories = None
    if scfg.engine == "trajectories":
        trajectories = dyn.TrajectoryConfig(count=scfg.trajectory_count, seed=scfg.seed)
    record = spec.record_run(
        site, source, scfg.time_grid(), engine=scfg.engine,
        noise=scfg.noise() if scfg.engine != "unitary" else None,
        trajectories=trajectories, flux=flux,
    )
    row = spec.spectrum_of([record], scfg.zero_pad_factor, scfg.window)
    run_dir = _run_dir(cfg, f"evolve-s{site}-f{flux_over_2pi:.6g}")
    trace_path = run_dir / "trace.csv"
    spectrum_path = run_dir / "spectrum.csv"
    sweep_mod.write_trace_csv(trace_path, record)
    sweep_mod.write_spectrum_csv(spectrum_path, row)
    rows = [{"index": 0, "flux_over_2pi": flux_over_2pi, "site": site,
             "seconds": None, "error": None}]
    manifest = _write_manifest(run_dir, cfg, rows, [trace_path.name, spectrum_path.name])
    for path in (trace_path, spectrum_path, manifest):
        click.echo(str(path))


@cli.command("couplings")
@_with_common
@click.option("--n", type=int, default=None, help="Number of qubits.")
@click.option("--alpha", type=float, default=None)
@click.option("--phi", "phi_over_2pi", type=float, default=1.0 / 120.0,
              help="Per-link phase phi/2pi.")
def couplings(config_path, seed, threads, out_dir, n, alpha, phi_over_2pi):
    """Print the synthesized per-link couplings and check the phase pattern."""
    cfg = _apply_overrides(_load_config(config_path), [
        ("model", "n", n), ("device", "alpha", alpha),
    ])
    scfg = cfg.to_sweep_config()
    phi = phi_over_2pi * 2.0 * math.pi
    device = scfg.device()
    schedule = mod.make_schedule(device, phi, scfg.alpha, scfg.base_frequencies)
    eff = mod.effective_couplings(device, schedule)
    click.echo(f"# g/2pi = {device.g / (2e6 * math.pi)} MHz, alpha = {scfg.alpha}, "
               f"phi/2pi = {phi_over_2pi}")
    click.echo("link,kind,abs_J_mhz,phase_rad")
    for i, amp in enumerate(eff.nn):
        click.echo(f"{i + 1}-{i + 2},nn,{abs(amp) / (2e6 * math.pi):.6f},{np.angle(amp):.9f}")
    for i, amp in enumerate(eff.nnn):
        click.echo(f"{i + 1}-{i + 3},nnn,{abs(amp) / (2e6 * math.pi):.6f},{np.angle(amp):.9f}")
    h_eff = mod.effective_hamiltonian(eff)
    h_ref = model.build_zigzag(mod.matched_lattice(device, phi, scfg.alpha))
    scale = max(mod.effective_coupling_strength(device.g, scfg.alpha), 1e-300)
    mismatch = float(np.max(np.abs(h_eff - h_ref))) / scale
    click.echo(f"# phase pattern vs target lattice: max entry mismatch = {mismatch:.3e} "
               f"({'OK' if mismatch <= 1e-12 else 'MISMATCH'})")
    if mismatch > 1e-12:
        raise RuntimeError("effective couplings deviate from the target gauge pattern")


def main(argv=None):
    """Console entry point with the documented exit codes."""
    try:
        cli.main(args=argv, standalone_mode=False)
    except ConfigError as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(1)
    except click.UsageError as exc:
        click.echo(f"config error: {exc.format_message()}", err=True)
        sys.exit(1)
    except click.ClickException as exc:
        exc.show()
        sys.exit(1)
    except click.Abort:
        sys.exit(1)
    except Exception as exc:  # runtime failures
        click.echo(f"runtime error: {exc}", err=True)
        sys.exit(2)


if __name__ == "__main__":
    main()
