"""Schema-checked CSV loading.

Each loader validates the header against the published column names and
raises SchemaError naming the offending column, so a mutated or mismatched
file fails loudly instead of plotting garbage.
"""

import csv

import numpy as np

EXACT_COLUMNS = ("flux_over_2pi", "eigenvalue_over_J")
HEATMAP_COLUMNS = ("flux_over_2pi", "frequency_mhz", "power")
PEAKS_COLUMNS = ("flux_over_2pi", "peak_mhz", "height")
DEVIATIONS_COLUMNS = ("flux_over_2pi", "peak_mhz", "matched_eigenvalue_mhz",
                      "deviation_mhz")
TRACE_COLUMNS = ("t_us", "sx", "sy")
SPECTRUM_COLUMNS = ("frequency_mhz", "power")


class SchemaError(ValueError):
    """CSV header does not match the published contract."""


def load_columns(path, expected):
    """Read a CSV with exactly the expected header; returns dict of arrays."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: empty file, expected header {','.join(expected)}")
        header = [h.strip() for h in header]
        for name in expected:
            if name not in header:
                raise SchemaError(f"{path}: missing column '{name}'")
        for name in header:
            if name not in expected:
                raise SchemaError(f"{path}: unexpected column '{name}'")
        index = [header.index(name) for name in expected]
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                rows.append([float(row[i]) for i in index])
            except (ValueError, IndexError) as exc:
                raise SchemaError(f"{path}:{lineno}: bad row ({exc})")
    data = np.array(rows, dtype=float).reshape(-1, len(expected))
    return {name: data[:, i] for i, name in enumerate(expected)}


def sniff_overlay(path):
    """Overlay points for the heatmap: theory from a deviations file, or the
    detected peaks from a peaks file, whichever schema the header matches."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        header = [h.strip() for h in fh.readline().strip().split(",")]
    if header == list(DEVIATIONS_COLUMNS):
        data = load_columns(path, DEVIATIONS_COLUMNS)
        return data["flux_over_2pi"], data["matched_eigenvalue_mhz"], "theory"
    if header == list(PEAKS_COLUMNS):
        data = load_columns(path, PEAKS_COLUMNS)
        return data["flux_over_2pi"], data["peak_mhz"], "peaks"
    raise SchemaError(
        f"{path}: overlay file must carry the peaks columns "
        f"{','.join(PEAKS_COLUMNS)} or the deviations columns "
        f"{','.join(DEVIATIONS_COLUMNS)}"
    )
