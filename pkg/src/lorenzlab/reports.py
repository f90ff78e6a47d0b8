"""Cross-route comparison: the same evolution computed independent ways.

The flagship check is the heat triangulation.  A Gaussian initial state
evolves three routes that share no numerics: the closed form, the
wealth-space solver followed by the curve transform, and the direct curve
solver.  Pairwise distances on a trimmed window decide pass or fail; the
trim exists because the transform's endpoint behavior (quantiles at
f -> 0, 1) is a different question from bulk accuracy.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .analytic import gaussian_lorenz
from .errors import ValidationError
from .fields import DensityField, Domain, LorenzCurve
from .fpe import FpeRunConfig, run_fpe
from .lorenz_pde import LorenzRunConfig, run_lorenz
from .metrics import gini_from_lorenz
from .numerics import trapezoid
from .runconfig import CompareJob
from .transforms import lorenz_from_density

ROUTE_PAIRS = (("analytic", "fpe"), ("analytic", "lorenz"), ("fpe", "lorenz"))


def trimmed_mask(fgrid: np.ndarray, trim: float) -> np.ndarray:
    if not 0.0 <= trim < 0.5:
        raise ValidationError("trim must lie in [0, 0.5)")
    return (fgrid >= trim - 1e-12) & (fgrid <= 1.0 - trim + 1e-12)


def sup_distance(a: np.ndarray, b: np.ndarray, fgrid: np.ndarray,
                 trim: float = 0.0) -> float:
    mask = trimmed_mask(fgrid, trim)
    return float(np.abs(a[mask] - b[mask]).max())


def l1_distance(a: np.ndarray, b: np.ndarray, fgrid: np.ndarray,
                trim: float = 0.0) -> float:
    mask = trimmed_mask(fgrid, trim)
    return float(trapezoid(np.abs(a[mask] - b[mask]), fgrid[mask]))


@dataclass(frozen=True)
class ComparisonRow:
    time: float
    sup: dict
    l1: dict
    gini: dict
    passed: bool


@dataclass(frozen=True)
class ComparisonReport:
    rows: tuple
    tolerance: float
    trim: float

    @property
    def passed(self) -> bool:
        return all(row.passed for row in self.rows)

    @property
    def worst_sup(self) -> float:
        return max(max(row.sup.values()) for row in self.rows)

    def to_document(self) -> dict:
        return {
            "kind": "comparison",
            "tolerance": self.tolerance,
            "trim": self.trim,
            "passed": self.passed,
            "worst_sup": self.worst_sup,
            "rows": [
                {"time": row.time, "sup": dict(row.sup), "l1": dict(row.l1),
                 "gini": dict(row.gini), "passed": row.passed}
                for row in self.rows
            ],
        }

    def summary_lines(self) -> list[str]:
        lines = []
        for row in self.rows:
            worst = max(row.sup.values())
            verdict = "pass" if row.passed else "FAIL"
            lines.append(f"t={row.time:g}: worst sup {worst:.3e} "
                         f"(tol {self.tolerance:g}) {verdict}")
        lines.append(f"overall: {'pass' if self.passed else 'FAIL'}")
        return lines


def _gini_or_nan(curve: LorenzCurve) -> float:
    if curve.domain is not Domain.POSITIVE or curve.right_boundary <= 0:
        return math.nan
    try:
        return gini_from_lorenz(curve.normalized())
    except ValidationError:
        return math.nan


def fpe_at_times(config: FpeRunConfig, times) -> list[DensityField]:
    """Chain solver segments so snapshots land exactly on ``times``."""
    state = config.initial
    out = []
    for t in times:
        span = t - state.time
        if span < -1e-12:
            raise ValidationError("times must be nondecreasing")
        if span > 1e-15:
            snaps, _ = run_fpe(replace(config, initial=state, t_end=span,
                                       record_every=None))
            state = snaps[-1]
        out.append(state)
    return out


def lorenz_at_times(config: LorenzRunConfig, times) -> list[LorenzCurve]:
    state = config.initial
    out = []
    for t in times:
        span = t - state.time
        if span < -1e-12:
            raise ValidationError("times must be nondecreasing")
        if span > 1e-15:
            snaps, _ = run_lorenz(replace(config, initial=state, t_end=span,
                                          record_every=None))
            state = snaps[-1]
        out.append(state)
    return out


def run_heat_triangulation(job: CompareJob):
    """Returns (report, curves_by_route) for a Gaussian heat run."""
    f = np.linspace(0.0, 1.0, job.f_count)
    m, s0, diff = job.initial_mean, job.initial_std, job.diffusion
    domain = job.fpe_config.initial.grid.domain

    densities = fpe_at_times(job.fpe_config, job.times)

    start = LorenzCurve(f, gaussian_lorenz(f, m, s0), time=0.0, domain=domain)
    lorenz_config = LorenzRunConfig(start, job.fpe_config.coeffs, t_end=0.0)
    curves_lorenz = lorenz_at_times(lorenz_config, job.times)

    rows = []
    routes = {"analytic": [], "fpe": [], "lorenz": []}
    for t, density, curve_l in zip(job.times, densities, curves_lorenz):
        std_t = math.sqrt(s0 * s0 + 2.0 * diff * t)
        exact = LorenzCurve(f, gaussian_lorenz(f, m, std_t), time=t,
                            domain=domain)
        curve_f = lorenz_from_density(density, job.f_count)
        by_route = {"analytic": exact, "fpe": curve_f, "lorenz": curve_l}
        for name, curve in by_route.items():
            routes[name].append(curve)
        sup = {}
        l1 = {}
        for a, b in ROUTE_PAIRS:
            key = f"{a}-{b}"
            sup[key] = sup_distance(by_route[a].values, by_route[b].values,
                                    f, job.trim)
            l1[key] = l1_distance(by_route[a].values, by_route[b].values,
                                  f, job.trim)
        gini = {name: _gini_or_nan(curve) for name, curve in by_route.items()}
        rows.append(ComparisonRow(time=t, sup=sup, l1=l1, gini=gini,
                                  passed=max(sup.values()) <= job.tolerance))
    report = ComparisonReport(rows=tuple(rows), tolerance=job.tolerance,
                              trim=job.trim)
    return report, routes
