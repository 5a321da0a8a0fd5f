"""Render sweep results (results.csv, schema v1) into the five report
figures: delay bound, angle bound, and position bound vs SNR, the
scaled-key variant of the position figure, and leakage vs SNR.

Rendering is a pure function of the CSV and the figure spec: rows are
grouped by (receiver, mode, snr), reduced to the median with the
interquartile range over seeds, and drawn as one series per group.  No
quantities are computed here beyond that aggregation; bounds arrive in
final units (meters, radians) from the producer.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

SCHEMA_VERSION = "1"

REQUIRED_COLUMNS = (
    "schema_version",
    "receiver",
    "mode",
    "snr_db",
    "seed",
    "peb_m",
    "toa_bound_los_m",
    "aod_bound_los_rad",
    "lpl",
    "gap_db",
    "singular_fim",
)

FIGURE_IDS = ("2a", "2b", "2c", "2d", "3")

# (receiver, mode) series drawn in the bound figures, with fixed styling
BOUND_SERIES = (
    ("bob", "clean", "tab:blue", "--", "legitimate, no artificial noise"),
    ("bob", "san", "tab:cyan", "-", "legitimate, structured noise"),
    ("eve", "san", "tab:red", "-", "eavesdropper, structured noise"),
    ("eve", "gaussian-baseline", "tab:orange", ":", "eavesdropper, gaussian baseline"),
)

LEAKAGE_SERIES = (
    ("san", "tab:red", "-", "structured noise"),
    ("gaussian-baseline", "tab:orange", ":", "gaussian baseline"),
    ("clean", "tab:gray", "--", "no artificial noise"),
)


class SchemaError(ValueError):
    """The CSV does not conform to the expected versioned schema."""


@dataclass(frozen=True)
class FigureSpec:
    csv_path: str
    figure_id: str
    out_path: str

    def __post_init__(self):
        if self.figure_id not in FIGURE_IDS:
            raise ValueError(f"unknown figure id {self.figure_id!r}; expected one of {FIGURE_IDS}")


def load_results(csv_path) -> list[dict]:
    """Rows of a schema-v1 results file, numeric fields parsed to float."""
    path = Path(csv_path)
    if not path.exists():
        raise SchemaError(f"results file not found: {path}")
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [c for c in REQUIRED_COLUMNS if c not in header]
        if missing:
            raise SchemaError(f"results file missing required columns: {', '.join(missing)}")
        rows = []
        for raw in reader:
            if raw["schema_version"] != SCHEMA_VERSION:
                raise SchemaError(
                    f"unsupported schema_version {raw['schema_version']!r}, expected {SCHEMA_VERSION}"
                )
            row = dict(raw)
            for field in ("snr_db", "peb_m", "toa_bound_los_m", "aod_bound_los_rad", "lpl", "gap_db"):
                row[field] = float(raw[field]) if raw[field] not in ("", None) else None
            rows.append(row)
    return rows


def series_stats(rows: list[dict], value_field: str):
    """Median and quartiles over seeds per SNR point.

    Returns (snrs, median, q1, q3) arrays; rows with an empty value are
    skipped (the leakage column is only populated on eavesdropper rows).
    """
    by_snr: dict[float, list[float]] = {}
    for row in rows:
        val = row[value_field]
        if val is None:
            continue
        by_snr.setdefault(row["snr_db"], []).append(val)
    snrs = np.array(sorted(by_snr))
    med = np.array([np.median(by_snr[s]) for s in snrs])
    q1 = np.array([np.percentile(by_snr[s], 25) for s in snrs])
    q3 = np.array([np.percentile(by_snr[s], 75) for s in snrs])
    return snrs, med, q1, q3


def _select(rows, receiver=None, mode=None):
    return [
        r
        for r in rows
        if (receiver is None or r["receiver"] == receiver)
        and (mode is None or r["mode"] == mode)
    ]


def _draw_bound_figure(ax, rows, value_field, ylabel, title):
    missing = []
    for receiver, mode, color, style, label in BOUND_SERIES:
        sel = _select(rows, receiver, mode)
        if not sel:
            missing.append(label)
            continue
        snrs, med, q1, q3 = series_stats(sel, value_field)
        ax.plot(snrs, med, color=color, linestyle=style, marker="o", ms=3, label=label)
        ax.fill_between(snrs, q1, q3, color=color, alpha=0.15, linewidth=0)
    ax.set_yscale("log")
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    return missing


def _draw_leakage_figure(ax, rows):
    missing = []
    eve_rows = _select(rows, receiver="eve")
    for mode, color, style, label in LEAKAGE_SERIES:
        sel = _select(eve_rows, mode=mode)
        if not sel or all(r["lpl"] is None for r in sel):
            missing.append(label)
            continue
        snrs, med, q1, q3 = series_stats(sel, "lpl")
        ax.plot(snrs, med, color=color, linestyle=style, marker="o", ms=3, label=label)
        ax.fill_between(snrs, q1, q3, color=color, alpha=0.15, linewidth=0)
    ax.axhline(0.0, color="k", linewidth=0.8, alpha=0.5)
    ax.set_ylabel("location-privacy leakage")
    ax.set_title("Leakage vs SNR (non-positive: eavesdropper no better)")
    return missing


def render(spec: FigureSpec) -> Path:
    """Render one figure id to spec.out_path; returns the written path."""
    rows = load_results(spec.csv_path)
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    if spec.figure_id == "2a":
        missing = _draw_bound_figure(
            ax, rows, "toa_bound_los_m", "delay bound, direct path [m]", "Delay estimation bound"
        )
    elif spec.figure_id == "2b":
        missing = _draw_bound_figure(
            ax, rows, "aod_bound_los_rad", "angle bound, direct path [rad]", "Angle estimation bound"
        )
    elif spec.figure_id == "2c":
        missing = _draw_bound_figure(
            ax, rows, "peb_m", "position error bound [m]", "Localization bound"
        )
    elif spec.figure_id == "2d":
        missing = _draw_bound_figure(
            ax, rows, "peb_m", "position error bound [m]", "Localization bound (scaled key shifts)"
        )
    else:
        missing = _draw_leakage_figure(ax, rows)
    ax.set_xlabel("SNR [dB]")
    ax.grid(True, which="both", linestyle=":", linewidth=0.6, alpha=0.6)
    if ax.get_legend_handles_labels()[0]:
        ax.legend(fontsize=8)
    if not rows:
        missing = ["no data rows in results file"]
    if missing:
        fig.text(
            0.5,
            0.01,
            "missing series: " + "; ".join(missing),
            ha="center",
            fontsize=7,
            color="firebrick",
        )
    out = Path(spec.out_path)
    out.parent.mkdir(parents=True, exist_ok=True)
    fig.tight_layout(rect=(0, 0.03, 1, 1))
    fig.savefig(out, dpi=150)
    plt.close(fig)
    return out
