"""Core containers: grids, densities, CDFs, Lorenz curves, metric series.

Every container validates its invariants at construction and is immutable
afterwards.  Tolerances below are package-wide defaults; solver configs can
tighten or relax their own monitors but the container invariants are fixed.
"""
from __future__ import annotations

from dataclasses import InitVar, dataclass, field
from enum import Enum
from typing import Iterable

import numpy as np

from .errors import ConvexityError, ValidationError
from .numerics import central_slopes, second_differences, trapezoid

#: container mass tolerance after normalization
TOL_MASS = 1e-6
#: absolute floor for discrete second differences of a Lorenz curve
TOL_CONVEX = 1e-10
#: negative density values beyond this are an error, below it they are clipped
TOL_NEG = 1e-12
#: consecutive CDF values closer than this collapse to one parametric point
DUPLICATE_F_TOL = 1e-12
#: agreement tolerance between the two Gini formulas at ~512 nodes
TOL_GINI = 1e-3


class Domain(str, Enum):
    """Support of the underlying distribution."""

    REAL_LINE = "real"
    POSITIVE = "positive"


def _as_1d_floats(a, name: str) -> np.ndarray:
    arr = np.array(a, dtype=float)
    if arr.ndim != 1:
        raise ValidationError(f"{name} must be one-dimensional")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} contains non-finite entries")
    return arr


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class SpatialGrid:
    """Strictly increasing 1-D node set tagged with its support."""

    nodes: np.ndarray
    domain: Domain = Domain.REAL_LINE

    def __post_init__(self):
        nodes = _as_1d_floats(self.nodes, "nodes")
        if nodes.size < 3:
            raise ValidationError("grid needs at least 3 nodes")
        if not np.all(np.diff(nodes) > 0):
            raise ValidationError("grid nodes must be strictly increasing")
        domain = Domain(self.domain)
        if domain is Domain.POSITIVE and nodes[0] < 0:
            raise ValidationError("positive-support grid has a negative node")
        object.__setattr__(self, "nodes", _freeze(nodes))
        object.__setattr__(self, "domain", domain)

    @classmethod
    def uniform(cls, x_min: float, x_max: float, n: int,
                domain: Domain = Domain.REAL_LINE) -> "SpatialGrid":
        return cls(np.linspace(x_min, x_max, n), domain)

    @property
    def n(self) -> int:
        return self.nodes.size

    @property
    def x_min(self) -> float:
        return float(self.nodes[0])

    @property
    def x_max(self) -> float:
        return float(self.nodes[-1])

    @property
    def is_uniform(self) -> bool:
        d = np.diff(self.nodes)
        return bool(np.all(np.abs(d - d[0]) <= 1e-9 * d[0]))

    @property
    def dx(self) -> float:
        """Uniform spacing; raises for non-uniform grids."""
        if not self.is_uniform:
            raise ValidationError("grid is not uniform")
        return float((self.x_max - self.x_min) / (self.n - 1))


@dataclass(frozen=True)
class DensityField:
    """Nodewise density samples on a grid, trapezoid-normalized to unit mass.

    ``normalize=False`` accepts values that are already normalized (still
    checked against TOL_MASS).  ``tail_threshold``, when given, requires the
    first and last node values to sit below it, the discrete stand-in for a
    density that vanishes toward the grid edges; pure-transform uses (a
    uniform density filling its whole grid, say) leave it off.

    ``mass_error`` is a diagnostic slot: transforms that rebuild a density
    record how far the raw reconstruction was from unit mass.  Such
    reconstructions live on strongly stretched grids where the trapezoid
    mass estimate is itself first-order inaccurate; they pass
    ``mass_slack`` to widen the unit-mass check to their known quadrature
    defect instead of rescaling accurate values by an inaccurate integral.
    """

    grid: SpatialGrid
    values: np.ndarray
    time: float = 0.0
    mass_error: float = 0.0
    normalize: InitVar[bool] = True
    tail_threshold: InitVar[float | None] = None
    mass_slack: InitVar[float | None] = None

    def __post_init__(self, normalize, tail_threshold, mass_slack):
        values = _as_1d_floats(self.values, "values")
        if values.size != self.grid.n:
            raise ValidationError("values length does not match grid")
        scale = float(np.max(np.abs(values))) if values.size else 0.0
        if float(np.min(values)) < -TOL_NEG * max(scale, 1.0):
            raise ValidationError("density has negative values beyond tolerance")
        values = np.maximum(values, 0.0)
        mass = trapezoid(values, self.grid.nodes)
        if mass <= 0.0:
            raise ValidationError("density mass must be positive")
        if normalize:
            values = values / mass
        else:
            tol = TOL_MASS if mass_slack is None else mass_slack
            if abs(mass - 1.0) > tol:
                raise ValidationError(
                    f"density mass {mass!r} deviates from 1 beyond {tol}"
                )
        if tail_threshold is not None:
            if values[0] > tail_threshold or values[-1] > tail_threshold:
                raise ValidationError(
                    "boundary density exceeds the tail threshold; widen the grid"
                )
        object.__setattr__(self, "values", _freeze(values))
        object.__setattr__(self, "time", float(self.time))
        object.__setattr__(self, "mass_error", float(self.mass_error))

    @property
    def mass(self) -> float:
        return trapezoid(self.values, self.grid.nodes)

    @property
    def mean(self) -> float:
        return trapezoid(self.grid.nodes * self.values, self.grid.nodes)

    @property
    def std(self) -> float:
        m = self.mean
        var = trapezoid((self.grid.nodes - m) ** 2 * self.values, self.grid.nodes)
        return float(np.sqrt(max(var, 0.0)))

    def with_values(self, values: np.ndarray, time: float | None = None,
                    normalize: bool = False) -> "DensityField":
        return DensityField(self.grid, values,
                            time=self.time if time is None else time,
                            normalize=normalize)


@dataclass(frozen=True)
class SampledCDF:
    """Cumulative distribution samples on the same grid as its density."""

    grid: SpatialGrid
    values: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        values = _as_1d_floats(self.values, "values")
        if values.size != self.grid.n:
            raise ValidationError("values length does not match grid")
        if np.any(np.diff(values) < -1e-12):
            raise ValidationError("CDF values must be nondecreasing")
        if abs(values[0]) > TOL_MASS or abs(values[-1] - 1.0) > TOL_MASS:
            raise ValidationError("CDF must run from 0 to 1 within TOL_MASS")
        object.__setattr__(self, "values", _freeze(values))
        object.__setattr__(self, "time", float(self.time))


@dataclass(frozen=True)
class LorenzCurve:
    """Lorenz curve samples on a uniform grid over [0, 1].

    Invariants: endpoints at f = 0 and f = 1 exactly, value 0 at f = 0,
    convexity (discrete second differences >= -TOL_CONVEX), and for
    positive-support problems a nondecreasing first step.  Real-line curves
    (zero or negative mean) may dip negative; the convexity requirement is
    the same.
    """

    fgrid: np.ndarray
    values: np.ndarray
    time: float = 0.0
    domain: Domain = Domain.POSITIVE

    def __post_init__(self):
        fgrid = _as_1d_floats(self.fgrid, "fgrid")
        values = _as_1d_floats(self.values, "values")
        if fgrid.size != values.size:
            raise ValidationError("fgrid and values length mismatch")
        n = fgrid.size
        if n < 3:
            raise ValidationError("Lorenz curve needs at least 3 nodes")
        ref = np.linspace(0.0, 1.0, n)
        if np.max(np.abs(fgrid - ref)) > 1e-12:
            raise ValidationError("fgrid must be uniform on [0, 1] incl. endpoints")
        scale = max(1.0, float(np.max(np.abs(values))))
        if abs(values[0]) > 1e-12 * scale:
            raise ValidationError("Lorenz curve must start at 0")
        values = values.copy()
        values[0] = 0.0
        sec = second_differences(values)
        worst = int(np.argmin(sec))
        if sec[worst] < -TOL_CONVEX:
            raise ConvexityError(
                f"convexity violated at node {worst + 1}: "
                f"second difference {sec[worst]:.3e}",
                node=worst + 1, value=float(sec[worst]),
            )
        domain = Domain(self.domain)
        if domain is Domain.POSITIVE and values[1] - values[0] < -1e-12 * scale:
            raise ValidationError("positive-support curve must be nondecreasing")
        object.__setattr__(self, "fgrid", _freeze(ref))
        object.__setattr__(self, "values", _freeze(values))
        object.__setattr__(self, "time", float(self.time))
        object.__setattr__(self, "domain", domain)

    @property
    def f_count(self) -> int:
        return self.fgrid.size

    @property
    def df(self) -> float:
        return float(1.0 / (self.f_count - 1))

    @property
    def right_boundary(self) -> float:
        """Value at f = 1; the mean of the underlying density."""
        return float(self.values[-1])

    @property
    def convexity_margin(self) -> float:
        """Smallest raw second difference over interior nodes."""
        return float(np.min(second_differences(self.values)))

    def slopes(self) -> np.ndarray:
        """dL/df at every node; the quantile profile of the density."""
        return central_slopes(self.values, self.df)

    def normalized(self) -> "LorenzCurve":
        """Rescale so the right boundary is exactly 1 (unit mean)."""
        rb = self.right_boundary
        if rb <= 0:
            raise ValidationError("cannot normalize a curve with non-positive mean")
        return LorenzCurve(self.fgrid, self.values / rb, self.time, self.domain)

    def with_values(self, values: np.ndarray, time: float | None = None) -> "LorenzCurve":
        return LorenzCurve(self.fgrid, values,
                           self.time if time is None else time, self.domain)


_METRIC_COLUMNS = ("times", "gini", "hoover", "mean", "std",
                   "mass_error", "convexity_margin")


@dataclass
class MetricSeries:
    """Per-record diagnostics of a run; absent entries are NaN."""

    times: np.ndarray
    gini: np.ndarray
    hoover: np.ndarray
    mean: np.ndarray
    std: np.ndarray
    mass_error: np.ndarray
    convexity_margin: np.ndarray

    @classmethod
    def from_rows(cls, rows: Iterable[dict]) -> "MetricSeries":
        rows = list(rows)
        cols = {}
        for name in _METRIC_COLUMNS:
            key = "time" if name == "times" else name
            cols[name] = np.array([float(r.get(key, np.nan)) for r in rows])
        return cls(**cols)

    def __len__(self) -> int:
        return self.times.size

    def row(self, idx: int) -> dict:
        return {
            "time": float(self.times[idx]),
            "gini": float(self.gini[idx]),
            "hoover": float(self.hoover[idx]),
            "mean": float(self.mean[idx]),
            "std": float(self.std[idx]),
            "mass_error": float(self.mass_error[idx]),
            "convexity_margin": float(self.convexity_margin[idx]),
        }


# ---------------------------------------------------------------------------
# density builders

def gaussian_density(grid: SpatialGrid, mean: float, std: float,
                     time: float = 0.0, zero_boundary: bool = True) -> DensityField:
    """Normalized Gaussian samples; boundary nodes zeroed for solver use."""
    if std <= 0:
        raise ValidationError("std must be positive")
    z = (grid.nodes - mean) / std
    vals = np.exp(-0.5 * z * z) / (std * np.sqrt(2.0 * np.pi))
    if zero_boundary:
        vals[0] = vals[-1] = 0.0
    return DensityField(grid, vals, time=time)


def uniform_density(grid: SpatialGrid, a: float, b: float,
                    time: float = 0.0) -> DensityField:
    if not b > a:
        raise ValidationError("need b > a")
    height = 1.0 / (b - a)
    nodes = grid.nodes
    vals = np.where((nodes >= a) & (nodes <= b), height, 0.0)
    # a node exactly on a jump carries the midpoint value, except at the
    # grid edge where the step never smears outside anyway
    snap = 1e-9 * grid.dx
    on_jump = (np.abs(nodes - a) <= snap) | (np.abs(nodes - b) <= snap)
    interior = (nodes > grid.x_min + snap) & (nodes < grid.x_max - snap)
    vals[on_jump & interior] = 0.5 * height
    return DensityField(grid, vals, time=time)


def delta_density(grid: SpatialGrid, at: float, width_nodes: float = 3.0,
                  time: float = 0.0) -> DensityField:
    """Delta initial condition regularized as a Gaussian of std = 3 grid
    spacings (narrowest bump the stencils resolve)."""
    return gaussian_density(grid, at, width_nodes * grid.dx, time=time)


def tabulated_density(grid: SpatialGrid, values: np.ndarray,
                      time: float = 0.0) -> DensityField:
    return DensityField(grid, values, time=time)


def gamma_density(grid: SpatialGrid, shape: float, scale: float,
                  time: float = 0.0) -> DensityField:
    """Gamma(k, theta) samples; mean = k * theta."""
    if shape <= 0 or scale <= 0:
        raise ValidationError("shape and scale must be positive")
    x = np.maximum(grid.nodes, 0.0)
    from scipy.special import gammaln

    logpdf = ((shape - 1.0) * np.log(np.maximum(x, 1e-300)) - x / scale
              - shape * np.log(scale) - gammaln(shape))
    vals = np.where(x > 0, np.exp(logpdf), 0.0)
    return DensityField(grid, vals, time=time)


def lognormal_density(grid: SpatialGrid, sigma_log: float, mean: float = 1.0,
                      time: float = 0.0) -> DensityField:
    """Lognormal with prescribed mean: mu_log = ln(mean) - sigma_log^2 / 2."""
    if sigma_log <= 0 or mean <= 0:
        raise ValidationError("sigma_log and mean must be positive")
    mu_log = np.log(mean) - 0.5 * sigma_log * sigma_log
    x = grid.nodes
    safe = np.maximum(x, 1e-300)
    z = (np.log(safe) - mu_log) / sigma_log
    vals = np.where(
        x > 0,
        np.exp(-0.5 * z * z) / (safe * sigma_log * np.sqrt(2.0 * np.pi)),
        0.0,
    )
    return DensityField(grid, vals, time=time)
