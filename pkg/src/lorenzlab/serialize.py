"""Deterministic file output: CSV profiles, JSON documents, run manifests.

Numbers are written with repr(), the shortest decimal that round-trips, so
identical runs produce byte-identical files.  Nothing here writes wall-clock
time, hostnames, or any other nondeterministic field; the manifest must stay
a pure function of config, seed, and library versions.
"""
from __future__ import annotations

import json
import sys
from pathlib import Path

import numpy as np

from . import __version__ as _package_version
from ._kernels import active_backend
from .errors import ValidationError
from .fields import DensityField, LorenzCurve, MetricSeries

METRIC_HEADER = "time,gini,hoover,mean,std,mass_error,convexity_margin"
PROFILE_HEADER = "coordinate,value"
SCHEMA_VERSION = 1


def _fmt(x: float) -> str:
    return repr(float(x))


def write_profile_csv(path: Path, coordinates: np.ndarray,
                      values: np.ndarray) -> None:
    if len(coordinates) != len(values):
        raise ValidationError("coordinate and value lengths differ")
    lines = [PROFILE_HEADER]
    lines.extend(f"{_fmt(c)},{_fmt(v)}" for c, v in zip(coordinates, values))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_profile_csv(path: Path) -> tuple[np.ndarray, np.ndarray]:
    """Inverse of write_profile_csv; header row is skipped, not checked."""
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    if data.shape[1] != 2:
        raise ValidationError(f"{path}: expected two columns, got {data.shape[1]}")
    return data[:, 0].copy(), data[:, 1].copy()


def write_wealth_csv(path: Path, wealths: np.ndarray) -> None:
    lines = ["agent,wealth"]
    lines.extend(f"{k},{_fmt(w)}" for k, w in enumerate(wealths))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_metrics_csv(path: Path, series: MetricSeries) -> None:
    lines = [METRIC_HEADER]
    for k in range(len(series)):
        row = series.row(k)
        lines.append(",".join(_fmt(row[name])
                              for name in METRIC_HEADER.split(",")))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_json(path: Path, document: dict) -> None:
    text = json.dumps(document, sort_keys=True, indent=2)
    Path(path).write_text(text + "\n", encoding="utf-8")


def density_document(density: DensityField) -> dict:
    grid = density.grid
    return {
        "kind": "density",
        "schema_version": SCHEMA_VERSION,
        "time": density.time,
        "domain": grid.domain.value,
        "grid": {"min": grid.x_min, "max": grid.x_max, "count": grid.n},
        "mass": density.mass,
        "mass_error": density.mass_error,
        "coordinates": [float(v) for v in grid.nodes],
        "values": [float(v) for v in density.values],
    }


def curve_document(curve: LorenzCurve) -> dict:
    return {
        "kind": "lorenz_curve",
        "schema_version": SCHEMA_VERSION,
        "time": curve.time,
        "domain": curve.domain.value,
        "grid": {"min": 0.0, "max": 1.0, "count": curve.f_count},
        "right_boundary": curve.right_boundary,
        "convexity_margin": curve.convexity_margin,
        "coordinates": [float(v) for v in curve.fgrid],
        "values": [float(v) for v in curve.values],
    }


def _snapshot_parts(snap):
    if isinstance(snap, DensityField):
        return "density", snap.grid.nodes, snap.values, density_document
    if isinstance(snap, LorenzCurve):
        return "curve", snap.fgrid, snap.values, curve_document
    raise ValidationError(f"cannot serialize snapshot {type(snap).__name__}")


def emit_plot_data(snapshots, series: MetricSeries | None, directory: Path,
                   fmt: str = "csv") -> dict:
    """Write one file per snapshot plus metrics and an index; returns the
    index document.

    ``fmt`` is csv, json, or both.  Metric series go to metrics.csv
    regardless (one documented schema); the index lists every file with
    its time.
    """
    if fmt not in ("csv", "json", "both"):
        raise ValidationError(f"unknown format {fmt!r}")
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    entries = []
    kind = None
    for idx, snap in enumerate(snapshots):
        if isinstance(snap, np.ndarray):
            entry = {"index": idx, "file": f"wealth_{idx:04d}.csv"}
            if series is not None and idx < len(series):
                entry["time"] = float(series.times[idx])
            write_wealth_csv(directory / entry["file"], snap)
            kind = "wealth"
            entries.append(entry)
            continue
        prefix, coords, values, document = _snapshot_parts(snap)
        kind = prefix
        entry = {"index": idx, "time": float(snap.time)}
        if fmt in ("csv", "both"):
            entry["file"] = f"{prefix}_{idx:04d}.csv"
            write_profile_csv(directory / entry["file"], coords, values)
        if fmt in ("json", "both"):
            entry["json"] = f"{prefix}_{idx:04d}.json"
            write_json(directory / entry["json"], document(snap))
        entries.append(entry)
    index = {
        "schema_version": SCHEMA_VERSION,
        "kind": kind,
        "snapshots": entries,
    }
    if series is not None:
        write_metrics_csv(directory / "metrics.csv", series)
        index["metrics"] = "metrics.csv"
    write_json(directory / "index.json", index)
    return index


def write_manifest(directory: Path, config_text: str, resolved: dict) -> dict:
    """Record everything needed to replay the run byte-for-byte.

    ``resolved`` carries effective settings that may differ from the config
    text (seed overrides, output format, derived seed lists).  Library
    versions pin the numeric environment; no timestamps, ever.
    """
    document = {
        "schema_version": SCHEMA_VERSION,
        "package_version": _package_version,
        "backend": active_backend(),
        "python": sys.version.split()[0],
        "numpy": np.__version__,
        "config_text": config_text,
        "resolved": resolved,
    }
    try:
        import scipy
        document["scipy"] = scipy.__version__
    except ImportError:
        pass
    write_json(Path(directory) / "manifest.json", document)
    return document
