"""Command-line harness.

Subcommands share a contract: deterministic outputs under one directory,
a manifest that replays the run byte for byte, and exit codes scripts can
branch on (0 ok, 2 config or validation rejection, 3 runtime failure).
"""
from __future__ import annotations

import argparse
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .analytic import (
    OUParams,
    gaussian_lorenz,
    heat_lorenz,
    heat_to_quadratic_map,
)
from .agents import ensemble_gini, run_agents, run_ensemble
from .errors import ConfigError, StabilityError, ValidationError
from .fields import Domain, LorenzCurve
from .fpe import run_fpe
from .lorenz_pde import run_lorenz
from .runconfig import (
    AgentsJob,
    AnalyticJob,
    CompareJob,
    Experiment,
    ScaleMapJob,
    load_config,
)
from .serialize import (
    emit_plot_data,
    write_json,
    write_metrics_csv,
    write_profile_csv,
    write_manifest,
)
from .reports import run_heat_triangulation

OUTPUT_ROOT_ENV = "LORENZLAB_OUTPUT_ROOT"


def _say(args, message: str) -> None:
    if not args.quiet:
        print(message)


def _out_dir(args, experiment: Experiment | None) -> Path:
    name = args.out or (experiment.out_dir if experiment else "out")
    path = Path(name)
    if not path.is_absolute():
        root = Path(os.environ.get(OUTPUT_ROOT_ENV, "."))
        path = root / path
    path.mkdir(parents=True, exist_ok=True)
    return path


def _resolved(experiment: Experiment, seed, fmt: str) -> dict:
    return {"kind": experiment.kind, "seed": seed, "format": fmt}


def _fmt_of(args, experiment: Experiment) -> str:
    return args.format or experiment.fmt


def _seed_of(args, experiment: Experiment, default=None):
    if args.seed is not None:
        return args.seed
    if experiment.seed is not None:
        return experiment.seed
    return default


def _metrics_tail(series) -> str:
    row = series.row(len(series) - 1)
    parts = [f"t={row['time']:g}"]
    for name in ("gini", "mean", "std", "mass_error"):
        value = row[name]
        if not math.isnan(value):
            parts.append(f"{name}={value:.6g}")
    return "  ".join(parts)


def _run_fpe_kind(args, experiment: Experiment, out: Path, fmt: str) -> int:
    snaps, series = run_fpe(experiment.job)
    emit_plot_data(snaps, series, out, fmt)
    write_manifest(out, experiment.config_text,
                   _resolved(experiment, None, fmt))
    _say(args, _metrics_tail(series))
    _say(args, f"wrote {len(snaps)} snapshots to {out}")
    return 0


def _run_lorenz_kind(args, experiment: Experiment, out: Path,
                     fmt: str) -> int:
    snaps, series = run_lorenz(experiment.job)
    emit_plot_data(snaps, series, out, fmt)
    write_manifest(out, experiment.config_text,
                   _resolved(experiment, None, fmt))
    _say(args, _metrics_tail(series))
    _say(args, f"wrote {len(snaps)} snapshots to {out}")
    return 0


def _run_agents_kind(args, experiment: Experiment, out: Path,
                     fmt: str) -> int:
    job: AgentsJob = experiment.job
    seed = _seed_of(args, experiment, default=0)
    if job.replicas > 1:
        replicas = run_ensemble(job.replicas, job.n_agents, job.steps,
                                job.intensity, seed,
                                initial_wealths=job.initial_wealths,
                                record_every=job.record_every,
                                time_scale=job.time_scale)
        for k, series in enumerate(replicas):
            write_metrics_csv(out / f"metrics_r{k:04d}.csv", series)
        times, gini_mean, gini_se = ensemble_gini(replicas)
        lines = ["time,gini_mean,gini_se"]
        lines.extend(f"{t!r},{g!r},{s!r}"
                     for t, g, s in zip(times, gini_mean, gini_se))
        (out / "ensemble.csv").write_text("\n".join(lines) + "\n",
                                          encoding="utf-8")
        write_manifest(out, experiment.config_text,
                       _resolved(experiment, seed, fmt)
                       | {"replicas": job.replicas})
        _say(args, f"ensemble of {job.replicas}: final gini "
                   f"{gini_mean[-1]:.4f} +- {gini_se[-1]:.4f} (1 SE)")
        return 0
    snaps, series = run_agents(job.n_agents, job.steps, job.intensity, seed,
                               initial_wealths=job.initial_wealths,
                               record_every=job.record_every,
                               time_scale=job.time_scale)
    emit_plot_data(snaps, series, out, fmt)
    write_manifest(out, experiment.config_text,
                   _resolved(experiment, seed, fmt))
    _say(args, _metrics_tail(series))
    return 0


def _run_analytic_kind(args, experiment: Experiment, out: Path,
                       fmt: str) -> int:
    job: AnalyticJob = experiment.job
    curves = job.curves()
    emit_plot_data(curves, None, out, fmt)
    write_manifest(out, experiment.config_text,
                   _resolved(experiment, None, fmt))
    _say(args, f"wrote {len(curves)} {job.family} curves to {out}")
    return 0


def _run_scale_map_kind(args, experiment: Experiment, out: Path,
                        fmt: str) -> int:
    job: ScaleMapJob = experiment.job
    f = np.linspace(0.0, 1.0, job.f_count)
    vals = heat_lorenz(f, job.heat_time, job.diffusion, job.initial_mean)
    curve = LorenzCurve(f, vals, time=job.heat_time, domain=Domain.REAL_LINE)
    mapped, s = heat_to_quadratic_map(curve)
    emit_plot_data([curve, mapped], None, out, fmt)
    write_json(out / "map.json", {"heat_time": job.heat_time,
                                  "map_time": s})
    write_manifest(out, experiment.config_text,
                   _resolved(experiment, None, fmt))
    _say(args, f"heat time {job.heat_time:g} maps to scale time {s:.6g}")
    return 0


def _run_compare_kind(args, experiment: Experiment, out: Path,
                      fmt: str) -> int:
    job: CompareJob = experiment.job
    report, routes = run_heat_triangulation(job)
    write_json(out / "report.json", report.to_document())
    if fmt in ("csv", "both"):
        for name, curves in sorted(routes.items()):
            for k, curve in enumerate(curves):
                write_profile_csv(out / f"{name}_{k:04d}.csv",
                                  curve.fgrid, curve.values)
    write_manifest(out, experiment.config_text,
                   _resolved(experiment, None, fmt))
    for line in report.summary_lines():
        _say(args, line)
    if not report.passed:
        print("error: route disagreement exceeds tolerance", file=sys.stderr)
        return 3
    return 0


_RUNNERS = {
    "fpe": _run_fpe_kind,
    "lorenz": _run_lorenz_kind,
    "agents": _run_agents_kind,
    "analytic": _run_analytic_kind,
    "scale-map": _run_scale_map_kind,
    "compare": _run_compare_kind,
}


def _cmd_run(args) -> int:
    experiment = load_config(args.config)
    out = _out_dir(args, experiment)
    fmt = _fmt_of(args, experiment)
    return _RUNNERS[experiment.kind](args, experiment, out, fmt)


def _cmd_validate(args) -> int:
    experiment = load_config(args.config)
    _say(args, f"config ok: kind={experiment.kind}")
    return 0


def _cmd_compare(args) -> int:
    experiment = load_config(args.config)
    if experiment.kind != "compare":
        raise ConfigError(
            f"compare needs a compare config, got kind={experiment.kind}")
    out = _out_dir(args, experiment)
    return _run_compare_kind(args, experiment, out,
                             _fmt_of(args, experiment))


def _inline_analytic_value(args) -> float:
    if args.family == "heat":
        return float(heat_lorenz(args.f, args.t, args.diffusion,
                                 args.initial_mean))
    if args.family == "gaussian":
        if args.std is None:
            raise ConfigError("gaussian family needs --std")
        mean = args.mean if args.mean is not None else 0.0
        return float(gaussian_lorenz(args.f, mean, args.std))
    if args.rate is None or args.target is None:
        raise ConfigError("ou family needs --rate and --target")
    params = OUParams(args.rate, args.target, args.diffusion,
                      initial_mean=args.initial_mean)
    return float(gaussian_lorenz(
        args.f, params.mean(args.t),
        params.std(args.t, initial_std=args.initial_std)))


def _cmd_analytic(args) -> int:
    if args.config:
        experiment = load_config(args.config)
        if experiment.kind != "analytic":
            raise ConfigError(
                f"analytic needs an analytic config, got "
                f"kind={experiment.kind}")
        return _run_analytic_kind(args, experiment, _out_dir(args, experiment),
                                  _fmt_of(args, experiment))
    if args.family is None or args.f is None:
        raise ConfigError("inline mode needs --family and --f "
                          "(or pass --config)")
    value = _inline_analytic_value(args)
    print(f"L({args.f!r}, t={args.t!r}) = {value!r}")
    return 0


def _cmd_scale_map(args) -> int:
    if args.config:
        experiment = load_config(args.config)
        if experiment.kind != "scale-map":
            raise ConfigError(
                f"scale-map needs a scale-map config, got "
                f"kind={experiment.kind}")
        return _run_scale_map_kind(args, experiment,
                                   _out_dir(args, experiment),
                                   _fmt_of(args, experiment))
    if args.t is None:
        raise ConfigError("inline mode needs --t (or pass --config)")
    from .analytic import map_time_from_heat_time
    s = map_time_from_heat_time(args.t)
    print(f"heat time {args.t!r} -> scale time {s!r}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lorenzlab",
        description="Lorenz-curve dynamics: solvers, agents, closed forms.")
    parser.add_argument("--version", action="version",
                        version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config_required=True):
        p.add_argument("--config", required=config_required,
                       help="experiment INI file")
        p.add_argument("--out", help="output directory (under "
                       f"${OUTPUT_ROOT_ENV} if relative)")
        p.add_argument("--seed", type=int, help="override the config seed")
        p.add_argument("--format", choices=("csv", "json", "both"),
                       help="snapshot file format (default from config)")
        p.add_argument("--quiet", action="store_true",
                       help="suppress progress output")

    p_run = sub.add_parser("run", help="run any configured experiment")
    common(p_run)
    p_run.set_defaults(handler=_cmd_run)

    p_val = sub.add_parser("validate", help="check a config without running")
    common(p_val)
    p_val.set_defaults(handler=_cmd_validate)

    p_cmp = sub.add_parser("compare",
                           help="triangulate solver routes against the "
                                "closed form")
    common(p_cmp)
    p_cmp.set_defaults(handler=_cmd_compare)

    p_ana = sub.add_parser("analytic",
                           help="evaluate closed-form curves")
    common(p_ana, config_required=False)
    p_ana.add_argument("--family", choices=("heat", "ou", "gaussian"))
    p_ana.add_argument("--f", type=float, help="population fraction in [0,1]")
    p_ana.add_argument("--t", type=float, default=0.0)
    p_ana.add_argument("--diffusion", type=float, default=1.0)
    p_ana.add_argument("--initial-mean", type=float, default=0.0)
    p_ana.add_argument("--initial-std", type=float, default=0.0)
    p_ana.add_argument("--mean", type=float)
    p_ana.add_argument("--std", type=float)
    p_ana.add_argument("--rate", type=float)
    p_ana.add_argument("--target", type=float)
    p_ana.set_defaults(handler=_cmd_analytic)

    p_map = sub.add_parser("scale-map",
                           help="map a heat-flow curve to the rescaled frame")
    common(p_map, config_required=False)
    p_map.add_argument("--t", type=float, help="heat time to map")
    p_map.set_defaults(handler=_cmd_scale_map)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except (ConfigError, ValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except StabilityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


def main_entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    main_entry()
