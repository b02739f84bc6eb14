"""Run configuration: file schema, validation, unit conversion, hashing.

Config files speak laboratory units (MHz for g and nu over 2*pi, GHz for
base frequencies, us for times, ns for the sampling step); the core speaks
angular frequencies and seconds.  This module is the single conversion
site.

The config hash covers everything that affects the numbers in the output
files (physics, numerics, seed) and excludes execution-only knobs
(threads, out_dir), so re-running one hash at any thread count must
reproduce the CSVs byte for byte.
"""

import hashlib
import json
import math
from dataclasses import dataclass, field, fields, replace

from . import sweep as sweep_mod

TWO_PI = 2.0 * math.pi


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending key."""


_SCHEMA = {
    "model": {"variant": "zigzag", "n": 14, "boundary": "open"},
    "device": {"g_mhz": 10.0, "base_ghz": [5.00, 4.85, 4.75], "alpha": 1.0},
    "noise": {"enabled": True, "t1_us": 20.0, "t2_star_us": 2.0},
    "time": {"t_end_us": 4.0, "dt_sample_ns": 2.0, "rtol": 1e-8, "atol": 1e-10},
    "spectroscopy": {
        "zero_pad_factor": 4,
        "window": "rectangular",
        "rel_threshold": 0.05,
        "min_separation_bins": 1.0,
    },
    "sweep": {"fluxes": 120, "engine": "lindblad"},
    "trajectories": {"count": 500},
    "run": {"seed": 0, "threads": 0, "out_dir": "runs"},
}

# run.* only steers execution and must not change output bytes
_HASH_EXCLUDED = {("run", "threads"), ("run", "out_dir")}


@dataclass(frozen=True)
class RunConfig:
    """Validated configuration in file units; see _SCHEMA for the layout."""

    sections: dict = field(default_factory=dict)

    @staticmethod
    def defaults() -> "RunConfig":
        return RunConfig.from_dict({})

    @staticmethod
    def from_dict(data: dict) -> "RunConfig":
        if not isinstance(data, dict):
            raise ConfigError("config root must be a mapping of sections")
        merged = {}
        for section, keys in _SCHEMA.items():
            given = data.get(section, {})
            if given is None:
                given = {}
            if not isinstance(given, dict):
                raise ConfigError(f"section '{section}' must be a mapping")
            for key in given:
                if key not in keys:
                    raise ConfigError(f"unknown key '{section}.{key}'")
            merged[section] = {**keys, **given}
        for section in data:
            if section not in _SCHEMA:
                raise ConfigError(f"unknown section '{section}'")
        cfg = RunConfig(sections=merged)
        cfg._validate()
        return cfg

    def _validate(self) -> None:
        get = self.get
        if get("model", "variant") not in ("zigzag", "harper"):
            raise ConfigError("model.variant must be 'zigzag' or 'harper'")
        if get("model", "boundary") not in ("open", "periodic"):
            raise ConfigError("model.boundary must be 'open' or 'periodic'")
        if not isinstance(get("model", "n"), int) or get("model", "n") < 1:
            raise ConfigError("model.n must be a positive integer")
        base = get("device", "base_ghz")
        if not (isinstance(base, (list, tuple)) and len(base) == 3):
            raise ConfigError("device.base_ghz must list three frequencies")
        for key, positive in (
            (("device", "g_mhz"), True),
            (("time", "t_end_us"), True),
            (("time", "dt_sample_ns"), True),
            (("time", "rtol"), True),
            (("time", "atol"), True),
            (("noise", "t1_us"), True),
            (("noise", "t2_star_us"), True),
        ):
            value = get(*key)
            if not isinstance(value, (int, float)) or (positive and value <= 0):
                raise ConfigError(f"{key[0]}.{key[1]} must be a positive number")
        if not 0.0 <= get("device", "alpha") <= 1.8:
            raise ConfigError("device.alpha must lie in [0, 1.8]")
        if get("sweep", "engine") not in ("lindblad", "trajectories", "unitary"):
            raise ConfigError("sweep.engine must be lindblad, trajectories or unitary")
        if get("sweep", "engine") == "unitary" and get("noise", "enabled"):
            raise ConfigError(
                "sweep.engine=unitary is closed-system; set noise.enabled=false"
            )
        if not isinstance(get("sweep", "fluxes"), int) or get("sweep", "fluxes") < 1:
            raise ConfigError("sweep.fluxes must be a positive integer")
        if get("spectroscopy", "window") not in ("rectangular", "hann"):
            raise ConfigError("spectroscopy.window must be 'rectangular' or 'hann'")
        if not 0.0 < get("spectroscopy", "rel_threshold") < 1.0:
            raise ConfigError("spectroscopy.rel_threshold must be in (0, 1)")
        zpf = get("spectroscopy", "zero_pad_factor")
        if not isinstance(zpf, int) or zpf < 1:
            raise ConfigError("spectroscopy.zero_pad_factor must be an integer >= 1")
        if not isinstance(get("trajectories", "count"), int) or get("trajectories", "count") < 1:
            raise ConfigError("trajectories.count must be a positive integer")
        if not isinstance(get("run", "seed"), int):
            raise ConfigError("run.seed must be an integer")
        if not isinstance(get("run", "threads"), int) or get("run", "threads") < 0:
            raise ConfigError("run.threads must be a non-negative integer (0 = all cores)")

    def get(self, section: str, key: str):
        return self.sections[section][key]

    def override(self, section: str, key: str, value) -> "RunConfig":
        if section not in _SCHEMA or key not in _SCHEMA[section]:
            raise ConfigError(f"unknown key '{section}.{key}'")
        sections = {s: dict(v) for s, v in self.sections.items()}
        sections[section][key] = value
        cfg = RunConfig(sections=sections)
        cfg._validate()
        return cfg

    def to_dict(self) -> dict:
        return {s: dict(v) for s, v in self.sections.items()}

    def __eq__(self, other) -> bool:
        return isinstance(other, RunConfig) and self.to_dict() == other.to_dict()

    def config_hash(self) -> str:
        """SHA-256 over the canonical form, execution-only keys excluded."""
        doc = self.to_dict()
        for section, key in _HASH_EXCLUDED:
            doc[section].pop(key, None)
        blob = json.dumps(doc, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode("ascii")).hexdigest()

    def run_id(self) -> str:
        return self.config_hash()[:12]

    def to_sweep_config(self) -> "sweep_mod.SweepConfig":
        get = self.get
        noise_on = bool(get("noise", "enabled")) and get("sweep", "engine") != "unitary"
        return sweep_mod.SweepConfig(
            n_sites=get("model", "n"),
            model=get("model", "variant"),
            boundary=get("model", "boundary"),
            flux_count=get("sweep", "fluxes"),
            engine=get("sweep", "engine"),
            g=TWO_PI * get("device", "g_mhz") * 1e6,
            base_frequencies=tuple(TWO_PI * f * 1e9 for f in get("device", "base_ghz")),
            alpha=float(get("device", "alpha")),
            t1=get("noise", "t1_us") * 1e-6 if noise_on else None,
            t2_star=get("noise", "t2_star_us") * 1e-6 if noise_on else None,
            t_end=get("time", "t_end_us") * 1e-6,
            dt_sample=get("time", "dt_sample_ns") * 1e-9,
            rtol=float(get("time", "rtol")),
            atol=float(get("time", "atol")),
            zero_pad_factor=get("spectroscopy", "zero_pad_factor"),
            window=get("spectroscopy", "window"),
            rel_threshold=float(get("spectroscopy", "rel_threshold")),
            min_separation_bins=float(get("spectroscopy", "min_separation_bins")),
            trajectory_count=get("trajectories", "count"),
            seed=get("run", "seed"),
        )
