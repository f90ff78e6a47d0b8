"""Explicit conservative solver for the density-side dynamics.

Flux-form central differencing of rho_t = -(drift rho)_x + (D rho)_xx on a
uniform grid, first order in time.  The diffusion coefficient may depend on
the density itself (the wealth-exchange model); it is then frozen within a
step and re-evaluated from the updated density before the next one, with the
stability bound re-checked against the fresh coefficient.

Monitors per step: no node below -TOL_NEG before clipping, mass within
1e-8 of 1 before the renormalization correction, and the max-norm growth
cap.  A violated monitor raises StabilityError rather than degrading the
run silently.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .coefficients import CoefficientSpec, diffusion_profile, drift_profile
from .errors import StabilityError, ValidationError
from .fields import TOL_NEG, DensityField, Domain, MetricSeries
from .metrics import TOL_UNIT, gini_from_density
from .numerics import trapezoid

#: dimensionless stability constant in dt <= CFL_FPE * dx^2 / max(D)
CFL_FPE = 0.4
#: fraction of the stability bound taken when dt is chosen automatically
AUTO_DT_MARGIN = 0.5


def stable_dt_bound(dx: float, d_max: float) -> float:
    if d_max <= 0:
        raise ValidationError("diffusion must be positive somewhere")
    return CFL_FPE * dx * dx / d_max


@dataclass(frozen=True)
class FpeRunConfig:
    """Everything a density-side run needs besides the kernels.

    ``dt=None`` picks AUTO_DT_MARGIN times the stability bound evaluated on
    the initial density.  For density-dependent diffusion the bound moves
    during the run and is re-checked each step; a run that condenses enough
    wealth to outgrow the initial bound needs an explicit smaller dt.
    """

    initial: DensityField
    coeffs: CoefficientSpec
    t_end: float
    dt: float | None = None
    record_every: float | None = None
    growth_cap: float = 2.0
    tail_threshold: float | None = None
    tol_mass_step: float = 1e-8
    tol_mean: float = 1e-6

    def __post_init__(self):
        if not self.initial.grid.is_uniform:
            raise ValidationError("the density solver requires a uniform grid")
        if self.t_end < 0:
            raise ValidationError("t_end must be nonnegative")
        if self.record_every is not None and not self.record_every > 0:
            raise ValidationError("record_every must be positive")
        if not self.growth_cap > 1.0:
            raise ValidationError("growth_cap must exceed 1")
        if self.tail_threshold is not None:
            v = self.initial.values
            if v[0] > self.tail_threshold or v[-1] > self.tail_threshold:
                raise ValidationError(
                    "initial boundary density exceeds the tail threshold"
                )
        bound = self.dt_bound_initial()
        if self.dt is not None:
            if not self.dt > 0:
                raise ValidationError("dt must be positive")
            if self.dt > bound:
                raise ValidationError(
                    f"dt {self.dt!r} exceeds the stability bound {bound!r}"
                )

    def dt_bound_initial(self) -> float:
        d0 = diffusion_profile(self.coeffs, self.initial)
        return stable_dt_bound(self.initial.grid.dx, float(np.max(d0)))

    def base_dt(self) -> float:
        if self.dt is not None:
            return self.dt
        return AUTO_DT_MARGIN * self.dt_bound_initial()

    def record_times(self) -> list[float]:
        """Start time, the cadence multiples, and the end time.

        ``t_end`` is a duration measured from the initial field's time.
        """
        t0 = self.initial.time
        if self.t_end == 0:
            return [t0]
        every = self.record_every
        if every is None:
            every = self.t_end / 10.0
        times = [t0]
        k = 1
        while k * every < self.t_end * (1.0 - 1e-12):
            times.append(t0 + k * every)
            k += 1
        times.append(t0 + self.t_end)
        return times


def _step_once(rho: np.ndarray, drift_arr, dcoef: np.ndarray, dt: float,
               dx: float, x: np.ndarray, out: np.ndarray, growth_cap: float,
               tol_mass_step: float) -> float:
    """Advance ``rho`` into ``out`` and run the per-step monitors.

    Returns the pre-renormalization mass deviation.  ``out`` comes back
    clipped and renormalized.
    """
    peak_before = float(np.max(rho))
    _kernels.fpe_step(rho, drift_arr, dcoef, dt, dx, out=out)
    worst = float(np.min(out))
    if worst < -TOL_NEG * max(peak_before, 1.0):
        raise StabilityError(
            f"density undershot to {worst:.3e}; reduce dt below {dt:.3e}"
        )
    np.maximum(out, 0.0, out=out)
    mass = trapezoid(out, x)
    deviation = abs(mass - 1.0)
    if deviation > tol_mass_step:
        raise StabilityError(
            f"mass leaked to {mass!r} in one step; widen the grid or reduce dt"
        )
    out /= mass
    if float(np.max(out)) > growth_cap * max(peak_before, 1e-300):
        raise StabilityError(
            f"max-norm grew past the factor-{growth_cap} cap; reduce dt"
        )
    return deviation


def step_fpe(density: DensityField, coeffs: CoefficientSpec,
             dt: float) -> DensityField:
    """One explicit step; validates dt against the current stability bound."""
    if not density.grid.is_uniform:
        raise ValidationError("the density solver requires a uniform grid")
    dx = density.grid.dx
    dcoef = diffusion_profile(coeffs, density)
    bound = stable_dt_bound(dx, float(np.max(dcoef)))
    if not 0 < dt <= bound:
        raise ValidationError(
            f"dt {dt!r} outside (0, {bound!r}] for the current density"
        )
    drift_arr = drift_profile(coeffs, density.grid.nodes)
    out = np.empty_like(density.values)
    deviation = _step_once(density.values, drift_arr, dcoef, dt, dx,
                           density.grid.nodes, out,
                           growth_cap=2.0, tol_mass_step=1e-8)
    return DensityField(density.grid, out, time=density.time + dt,
                        mass_error=deviation)


def run_fpe(config: FpeRunConfig) -> tuple[list[DensityField], MetricSeries]:
    """Integrate to t_end, recording snapshots and metrics at the cadence.

    The step size within each record segment divides the segment length
    exactly, so snapshot times are hit without drift or interpolation.
    """
    grid = config.initial.grid
    x = grid.nodes
    dx = grid.dx
    n = grid.n
    coeffs = config.coeffs
    drift_arr = drift_profile(coeffs, x)
    rho = config.initial.values.copy()
    out = np.empty(n)
    dcoef = np.empty(n)
    if coeffs.nonlocal_diffusion:
        if grid.domain is not Domain.POSITIVE:
            raise ValidationError("yard-sale diffusion requires positive support")
        intensity = coeffs.diffusion.intensity
    else:
        diffusion_profile(coeffs, config.initial, out=dcoef)
    base_dt = config.base_dt()
    mean_ref = config.initial.mean
    times = config.record_times()

    def make_snapshot(t: float, mass_dev: float) -> DensityField:
        return DensityField(grid, rho, time=t, mass_error=mass_dev,
                            tail_threshold=config.tail_threshold)

    def metrics_row(snap: DensityField) -> dict:
        row = {"time": snap.time, "mean": snap.mean, "std": snap.std,
               "mass_error": snap.mass_error}
        if (snap.grid.domain is Domain.POSITIVE
                and abs(snap.mean - 1.0) <= TOL_UNIT):
            row["gini"] = gini_from_density(snap)
        return row

    snapshots = [make_snapshot(times[0], 0.0)]
    rows = [metrics_row(snapshots[0])]
    for t_a, t_b in zip(times[:-1], times[1:]):
        span = t_b - t_a
        steps = max(1, math.ceil(span / base_dt - 1e-12))
        dt = span / steps
        worst_dev = 0.0
        for _ in range(steps):
            if coeffs.nonlocal_diffusion:
                _kernels.yardsale_density_profile(x, rho, intensity, out=dcoef)
                bound = stable_dt_bound(dx, float(np.max(dcoef)))
                if dt > bound:
                    raise StabilityError(
                        f"diffusion grew: dt {dt:.3e} exceeds the current "
                        f"bound {bound:.3e}; rerun with a smaller dt"
                    )
            dev = _step_once(rho, drift_arr, dcoef, dt, dx, x, out,
                             config.growth_cap, config.tol_mass_step)
            worst_dev = max(worst_dev, dev)
            rho, out = out, rho
        snap = make_snapshot(t_b, worst_dev)
        if config.coeffs.drift_free and abs(snap.mean - mean_ref) > config.tol_mean:
            raise StabilityError(
                f"drift-free mean moved from {mean_ref!r} to {snap.mean!r}; "
                "boundary flux is leaking first moment"
            )
        snapshots.append(snap)
        rows.append(metrics_row(snap))
    return snapshots, MetricSeries.from_rows(rows)
