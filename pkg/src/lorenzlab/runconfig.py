"""INI experiment configs: parse, validate, and build runnable jobs.

One file describes one experiment.  The [experiment] section names the
kind; the kind decides which other sections are read.  Errors point at
the config line that caused them so a long file stays debuggable.
"""
from __future__ import annotations

import configparser
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .analytic import OUParams, gaussian_lorenz, heat_lorenz
from .coefficients import (
    CoefficientSpec,
    ConstantDiffusion,
    OUDrift,
    YardSaleDiffusion,
    ZeroDrift,
)
from .errors import ConfigError
from .fields import (
    DensityField,
    Domain,
    LorenzCurve,
    SpatialGrid,
    delta_density,
    gamma_density,
    gaussian_density,
    lognormal_density,
    tabulated_density,
    uniform_density,
)
from .fpe import FpeRunConfig
from .lorenz_pde import LorenzRunConfig
from .serialize import read_profile_csv
from .transforms import lorenz_from_density

SCHEMA_VERSION = 1
KINDS = ("fpe", "lorenz", "agents", "analytic", "scale-map", "compare")

_REQUIRED = object()


class _Conf:
    """configparser wrapper that anchors every complaint to a file line."""

    def __init__(self, path: Path, text: str):
        self.path = path
        self.lines = text.splitlines()
        self.parser = configparser.ConfigParser(
            inline_comment_prefixes=("#",), interpolation=None)
        try:
            self.parser.read_string(text)
        except configparser.Error as exc:
            raise ConfigError(f"{path}: {exc}") from exc

    def _anchor(self, section: str, key: str | None) -> str:
        header = f"[{section}]"
        sec_line = 0
        for i, line in enumerate(self.lines):
            if line.split("#")[0].strip() == header:
                sec_line = i + 1
                if key is None:
                    break
            elif sec_line and key is not None:
                stripped = line.split("#")[0].strip()
                if stripped.startswith(f"{key} ") or stripped.startswith(f"{key}="):
                    return f"{self.path}:{i + 1}"
                if stripped.startswith("["):
                    break
        return f"{self.path}:{sec_line}" if sec_line else str(self.path)

    def fail(self, section: str, key: str | None, message: str):
        where = self._anchor(section, key)
        label = f"[{section}] {key}" if key else f"[{section}]"
        raise ConfigError(f"{where}: {label}: {message}")

    def has(self, section: str, key: str) -> bool:
        return self.parser.has_option(section, key)

    def require_section(self, section: str) -> None:
        if not self.parser.has_section(section):
            raise ConfigError(f"{self.path}: missing section [{section}]")

    def get(self, section: str, key: str, conv=str, default=_REQUIRED):
        if not self.parser.has_option(section, key):
            if default is _REQUIRED:
                self.fail(section, None, f"missing key {key!r}")
            return default
        raw = self.parser.get(section, key).strip()
        try:
            return conv(raw)
        except (ValueError, TypeError):
            self.fail(section, key, f"cannot parse {raw!r} as {conv.__name__}")

    def choice(self, section: str, key: str, allowed, default=_REQUIRED) -> str:
        value = self.get(section, key, str, default)
        if value is not None and value not in allowed:
            self.fail(section, key,
                      f"got {value!r}, expected one of {', '.join(allowed)}")
        return value

    def positive(self, section: str, key: str, conv=float, default=_REQUIRED):
        value = self.get(section, key, conv, default)
        if value is not None and not value > 0:
            self.fail(section, key, "must be positive")
        return value


def _floats(raw: str) -> tuple[float, ...]:
    return tuple(float(part) for part in raw.split(",") if part.strip())


@dataclass(frozen=True)
class AgentsJob:
    n_agents: int
    steps: int
    intensity: float
    replicas: int = 1
    record_every: int | None = None
    time_scale: float = 1.0
    initial_wealths: np.ndarray | None = None


@dataclass(frozen=True)
class AnalyticJob:
    family: str                      # heat | ou | gaussian
    times: tuple[float, ...]
    f_count: int
    params: dict = field(default_factory=dict)

    def curves(self) -> list[LorenzCurve]:
        f = np.linspace(0.0, 1.0, self.f_count)
        out = []
        for t in self.times:
            if self.family == "heat":
                vals = heat_lorenz(f, t, self.params["diffusion"],
                                   self.params["initial_mean"])
            elif self.family == "ou":
                vals = gaussian_lorenz(
                    f, self.params["ou"].mean(t), self.params["ou"].std(
                        t, initial_std=self.params["initial_std"]))
            else:
                vals = gaussian_lorenz(f, self.params["mean"],
                                       self.params["std"])
            out.append(LorenzCurve(f, vals, time=t, domain=Domain.REAL_LINE))
        return out


@dataclass(frozen=True)
class ScaleMapJob:
    heat_time: float
    f_count: int
    diffusion: float = 1.0
    initial_mean: float = 0.0


@dataclass(frozen=True)
class CompareJob:
    fpe_config: FpeRunConfig
    f_count: int
    times: tuple[float, ...]
    tolerance: float
    trim: float
    initial_mean: float
    initial_std: float
    diffusion: float


@dataclass(frozen=True)
class Experiment:
    kind: str
    job: object
    out_dir: str
    fmt: str
    seed: int | None
    config_text: str
    config_path: Path


def _build_grid(conf: _Conf) -> SpatialGrid:
    conf.require_section("grid")
    domain = Domain(conf.choice("grid", "domain", ("real", "positive"),
                                default="real"))
    x_min = conf.get("grid", "x_min", float)
    x_max = conf.get("grid", "x_max", float)
    count = conf.positive("grid", "count", int)
    if not x_max > x_min:
        conf.fail("grid", "x_max", "must exceed x_min")
    if count < 5:
        conf.fail("grid", "count", "need at least 5 nodes")
    return SpatialGrid.uniform(x_min, x_max, count, domain)


def _build_initial(conf: _Conf, grid: SpatialGrid | None) -> DensityField:
    conf.require_section("initial")
    kind = conf.choice("initial", "kind",
                       ("gaussian", "uniform", "delta", "gamma",
                        "lognormal", "tabulated"))
    if kind == "tabulated":
        rel = conf.get("initial", "path")
        path = (conf.path.parent / rel).resolve()
        try:
            coords, values = read_profile_csv(path)
        except OSError as exc:
            conf.fail("initial", "path", f"cannot read {path}: {exc}")
        domain = grid.domain if grid is not None else Domain(
            conf.choice("grid", "domain", ("real", "positive"),
                        default="real"))
        return tabulated_density(SpatialGrid(coords, domain), values)
    if grid is None:
        grid = _build_grid(conf)
    if kind == "gaussian":
        return gaussian_density(grid, conf.get("initial", "mean", float),
                                conf.positive("initial", "std"))
    if kind == "uniform":
        return uniform_density(grid, conf.get("initial", "a", float),
                               conf.get("initial", "b", float))
    if kind == "delta":
        return delta_density(grid, conf.get("initial", "at", float),
                             conf.positive("initial", "width_nodes",
                                           default=3.0))
    if kind == "gamma":
        return gamma_density(grid, conf.positive("initial", "shape"),
                             conf.positive("initial", "scale"))
    return lognormal_density(grid, conf.positive("initial", "sigma_log"),
                             conf.positive("initial", "mean", default=1.0))


def _build_coefficients(conf: _Conf) -> CoefficientSpec:
    conf.require_section("coefficients")
    dkind = conf.choice("coefficients", "diffusion", ("constant", "yardsale"))
    if dkind == "constant":
        diffusion = ConstantDiffusion(conf.positive("coefficients", "value"))
    else:
        diffusion = YardSaleDiffusion(
            conf.positive("coefficients", "intensity"))
    drift_kind = conf.choice("coefficients", "drift", ("none", "ou"),
                             default="none")
    if drift_kind == "ou":
        drift = OUDrift(conf.positive("coefficients", "rate"),
                        conf.get("coefficients", "target", float))
    else:
        drift = ZeroDrift()
    return CoefficientSpec(diffusion, drift)


def _time_keys(conf: _Conf):
    conf.require_section("time")
    t_end = conf.get("time", "t_end", float)
    if t_end < 0:
        conf.fail("time", "t_end", "must be nonnegative")
    dt = conf.positive("time", "dt", default=None)
    record_every = conf.positive("time", "record_every", default=None)
    return t_end, dt, record_every


def _build_fpe(conf: _Conf) -> FpeRunConfig:
    grid = _build_grid(conf)
    initial = _build_initial(conf, grid)
    coeffs = _build_coefficients(conf)
    t_end, dt, record_every = _time_keys(conf)
    return FpeRunConfig(initial, coeffs, t_end, dt=dt,
                        record_every=record_every)


def _initial_curve(conf: _Conf, f_count: int) -> LorenzCurve:
    kind = conf.choice("lorenz", "initial",
                       ("from-density", "linear", "quadratic", "tabulated"),
                       default="from-density")
    f = np.linspace(0.0, 1.0, f_count)
    if kind == "from-density":
        density = _build_initial(conf, None)
        return lorenz_from_density(density, f_count)
    if kind == "quadratic":
        return LorenzCurve(f, f * f, domain=Domain.POSITIVE)
    if kind == "tabulated":
        rel = conf.get("lorenz", "path")
        path = (conf.path.parent / rel).resolve()
        try:
            coords, values = read_profile_csv(path)
        except OSError as exc:
            conf.fail("lorenz", "path", f"cannot read {path}: {exc}")
        domain = Domain(conf.choice("lorenz", "domain", ("real", "positive"),
                                    default="positive"))
        return LorenzCurve(coords, values, domain=domain)
    # linear: perfect equality has zero curvature, which the transformed
    # equation cannot start from; substitute the short-time heat profile
    mean = conf.get("lorenz", "mean", float, default=1.0)
    burn_in = conf.positive("lorenz", "burn_in", default=1e-4)
    vals = heat_lorenz(f, burn_in, 1.0, initial_mean=mean)
    return LorenzCurve(f, vals, domain=Domain.REAL_LINE)


def _build_lorenz(conf: _Conf) -> LorenzRunConfig:
    conf.require_section("lorenz")
    f_count = conf.positive("lorenz", "f_count", int)
    coeffs = _build_coefficients(conf)
    initial = _initial_curve(conf, f_count)
    t_end, dt_cap, record_every = _time_keys(conf)
    boundary_kind = conf.choice("lorenz", "boundary", ("fixed", "ou-mean"),
                                default="fixed")
    boundary = None
    if boundary_kind == "ou-mean":
        if not isinstance(coeffs.drift, OUDrift):
            conf.fail("lorenz", "boundary", "ou-mean needs drift = ou")
        if not isinstance(coeffs.diffusion, ConstantDiffusion):
            conf.fail("lorenz", "boundary", "ou-mean needs constant diffusion")
        params = OUParams(coeffs.drift.rate, coeffs.drift.target,
                          coeffs.diffusion.value,
                          initial_mean=initial.right_boundary)
        t0 = initial.time
        boundary = lambda t: params.mean(t - t0)
    cfl = conf.positive("lorenz", "cfl", default=0.4)
    return LorenzRunConfig(initial, coeffs, t_end, dt_cap=dt_cap,
                           record_every=record_every,
                           right_boundary=boundary, cfl=cfl)


def _stratified(quantile, n: int) -> np.ndarray:
    ranks = (np.arange(n) + 0.5) / n
    return quantile(ranks)


def _build_agents(conf: _Conf) -> AgentsJob:
    conf.require_section("agents")
    n_agents = conf.positive("agents", "n_agents", int)
    steps = conf.positive("agents", "steps", int)
    intensity = conf.positive("agents", "intensity")
    if not intensity < 1.0:
        conf.fail("agents", "intensity", "must be below 1")
    replicas = conf.positive("agents", "replicas", int, default=1)
    record_every = conf.positive("agents", "record_every", int, default=None)
    time_scale = conf.positive("agents", "time_scale", default=1.0)
    init_kind = conf.choice("agents", "initial",
                            ("equal", "stratified-gamma",
                             "stratified-lognormal"), default="equal")
    wealths = None
    if init_kind == "stratified-gamma":
        from scipy import stats
        shape = conf.positive("agents", "shape")
        scale = conf.positive("agents", "scale")
        wealths = _stratified(stats.gamma(shape, scale=scale).ppf, n_agents)
    elif init_kind == "stratified-lognormal":
        from scipy import stats
        sigma = conf.positive("agents", "sigma_log")
        mean = conf.positive("agents", "mean", default=1.0)
        mu = np.log(mean) - 0.5 * sigma * sigma
        wealths = _stratified(
            stats.lognorm(sigma, scale=np.exp(mu)).ppf, n_agents)
    return AgentsJob(n_agents, steps, intensity, replicas=replicas,
                     record_every=record_every, time_scale=time_scale,
                     initial_wealths=wealths)


def _build_analytic(conf: _Conf) -> AnalyticJob:
    conf.require_section("analytic")
    family = conf.choice("analytic", "family", ("heat", "ou", "gaussian"))
    f_count = conf.positive("analytic", "f_count", int, default=513)
    times = conf.get("analytic", "times", _floats, default=(0.0,))
    if family == "heat":
        params = {"diffusion": conf.positive("analytic", "diffusion",
                                             default=1.0),
                  "initial_mean": conf.get("analytic", "initial_mean", float,
                                           default=0.0)}
    elif family == "ou":
        ou = OUParams(conf.positive("analytic", "rate"),
                      conf.get("analytic", "target", float),
                      conf.positive("analytic", "diffusion"),
                      initial_mean=conf.get("analytic", "initial_mean", float,
                                            default=0.0))
        params = {"ou": ou,
                  "initial_std": conf.get("analytic", "initial_std", float,
                                          default=0.0)}
    else:
        params = {"mean": conf.get("analytic", "mean", float),
                  "std": conf.positive("analytic", "std")}
    return AnalyticJob(family, times, f_count, params)


def _build_scale_map(conf: _Conf) -> ScaleMapJob:
    conf.require_section("scale_map")
    return ScaleMapJob(
        heat_time=conf.positive("scale_map", "t"),
        f_count=conf.positive("scale_map", "f_count", int, default=513),
        diffusion=conf.positive("scale_map", "diffusion", default=1.0),
        initial_mean=conf.get("scale_map", "initial_mean", float,
                              default=0.0))


def _build_compare(conf: _Conf) -> CompareJob:
    conf.require_section("compare")
    fpe_config = _build_fpe(conf)
    conf.choice("initial", "kind", ("gaussian",))
    coeffs = fpe_config.coeffs
    if not isinstance(coeffs.diffusion, ConstantDiffusion) \
            or not coeffs.drift_free:
        conf.fail("coefficients", "diffusion",
                  "compare runs need drift-free constant diffusion")
    times = conf.get("compare", "times", _floats)
    if not times:
        conf.fail("compare", "times", "need at least one time")
    t_end, _, _ = _time_keys(conf)
    for t in times:
        if t <= 0 or t > t_end + 1e-12:
            conf.fail("compare", "times", "times must lie in (0, t_end]")
    return CompareJob(
        fpe_config=fpe_config,
        f_count=conf.positive("compare", "f_count", int, default=513),
        times=times,
        tolerance=conf.positive("compare", "tolerance", default=1e-2),
        trim=conf.get("compare", "trim", float, default=0.05),
        initial_mean=conf.get("initial", "mean", float),
        initial_std=conf.positive("initial", "std"),
        diffusion=coeffs.diffusion.value)


_BUILDERS = {
    "fpe": _build_fpe,
    "lorenz": _build_lorenz,
    "agents": _build_agents,
    "analytic": _build_analytic,
    "scale-map": _build_scale_map,
    "compare": _build_compare,
}


def load_config(path) -> Experiment:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text, path)


def parse_config(text: str, path: Path | str = "<config>") -> Experiment:
    path = Path(path)
    conf = _Conf(path, text)
    conf.require_section("experiment")
    version = conf.get("experiment", "schema_version", int)
    if version != SCHEMA_VERSION:
        conf.fail("experiment", "schema_version",
                  f"unsupported version {version}, this build reads "
                  f"{SCHEMA_VERSION}")
    kind = conf.choice("experiment", "kind", KINDS)
    seed = conf.get("experiment", "seed", int, default=None)
    if conf.parser.has_section("output"):
        out_dir = conf.get("output", "directory", str, default=kind)
        fmt = conf.choice("output", "format", ("csv", "json", "both"),
                          default="csv")
    else:
        out_dir, fmt = kind, "csv"
    job = _BUILDERS[kind](conf)
    return Experiment(kind=kind, job=job, out_dir=out_dir, fmt=fmt,
                      seed=seed, config_text=text, config_path=path)
