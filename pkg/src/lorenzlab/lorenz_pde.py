"""Direct explicit integrator for the Lorenz-curve dynamics.

The curve obeys curve_t = -Dt / curve_ff + integral of the transformed
drift, a nonlinear parabolic equation whose effective diffusivity scales
like Dt / curve_ff^2.  The step size is therefore chosen adaptively from
the current curvature floor each step; a fixed dt sized for the initial
curve would be thousands of times too small by the end of a spreading run.

Boundary handling: curve(0) stays 0, curve(1) follows the right-boundary
policy (fixed for mean-conserving dynamics, a prescribed mean path
otherwise).  Curvature stencils are central at every interior node; they
reach the prescribed boundary values but never difference across them.
Where the curve flattens into a boundary the curvature blows up and the
transformed-diffusion term shuts itself off, so the edges stay put.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from . import _kernels
from .coefficients import (
    CoefficientSpec,
    transformed_diffusion_profile,
    transformed_drift_profile,
)
from .errors import StabilityError, ValidationError
from .fields import TOL_CONVEX, Domain, LorenzCurve, MetricSeries
from .metrics import TOL_UNIT, gini_from_lorenz, hoover_from_lorenz
from .numerics import (
    CURVATURE_FLOOR_SCALE,
    central_slopes,
    curvature_floor,
    interior_curvature,
)

#: dimensionless stability constant in dt <= CFL * df^2 * min(L_ff)^2 / max(Dt)
CFL_LORENZ = 0.4
#: abort when the curvature floor claims more than this fraction of nodes
MAX_FLOOR_FRACTION = 0.10

BoundaryPolicy = Union[None, float, Callable[[float], float]]


def _policy_fn(policy: BoundaryPolicy, fallback: float) -> Callable[[float], float]:
    if policy is None:
        return lambda t: fallback
    if callable(policy):
        return policy
    value = float(policy)
    return lambda t: value


@dataclass(frozen=True)
class LorenzRunConfig:
    """Run parameters for the curve-side integrator.

    ``dt_cap`` is an optional ceiling on top of the adaptive bound, mainly
    for convergence studies.  ``right_boundary`` is None (keep the initial
    mean), a number, or a callable mean path m(t).
    """

    initial: LorenzCurve
    coeffs: CoefficientSpec
    t_end: float
    dt_cap: float | None = None
    record_every: float | None = None
    right_boundary: BoundaryPolicy = None
    cfl: float = CFL_LORENZ
    floor_scale: float = CURVATURE_FLOOR_SCALE
    max_floor_fraction: float = MAX_FLOOR_FRACTION
    max_steps: int = 5_000_000

    def __post_init__(self):
        if self.initial.f_count < 5:
            raise ValidationError("curve solver needs at least 5 f-nodes")
        if self.t_end < 0:
            raise ValidationError("t_end must be nonnegative")
        if self.dt_cap is not None and not self.dt_cap > 0:
            raise ValidationError("dt_cap must be positive")
        if self.record_every is not None and not self.record_every > 0:
            raise ValidationError("record_every must be positive")
        if not 0 < self.cfl < 1:
            raise ValidationError("cfl must lie in (0, 1)")
        if not self.floor_scale > 0:
            raise ValidationError("floor_scale must be positive")
        if not 0 < self.max_floor_fraction <= 1:
            raise ValidationError("max_floor_fraction must lie in (0, 1]")
        if self.max_steps < 1:
            raise ValidationError("max_steps must be positive")
        if self.right_boundary is not None and not callable(self.right_boundary):
            rb = self.initial.right_boundary
            scale = max(1.0, abs(rb))
            if abs(float(self.right_boundary) - rb) > 1e-6 * scale:
                raise ValidationError(
                    "fixed right-boundary value disagrees with the initial curve"
                )

    def record_times(self) -> list[float]:
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


def stable_dt_bound_lorenz(curve: LorenzCurve, coeffs,
                           cfl: float = CFL_LORENZ,
                           floor_scale: float = CURVATURE_FLOOR_SCALE) -> float:
    """Current adaptive step bound cfl * df^2 * min(L_ff)^2 / max(Dt)."""
    slopes = curve.slopes()
    eps = floor_scale * float(np.max(np.abs(slopes)))
    lff = interior_curvature(curve.values, curve.df, eps)
    dpro = transformed_diffusion_profile(curve, coeffs, slopes=slopes)
    d_max = float(np.max(dpro[1:-1]))
    if d_max <= 0:
        return math.inf
    lmin = float(np.min(lff))
    return cfl * curve.df * curve.df * lmin * lmin / d_max


def step_lorenz(curve: LorenzCurve, coeffs, dt: float,
                right_boundary: BoundaryPolicy = None) -> LorenzCurve:
    """One explicit step of the curve dynamics.

    ``dt`` must sit within the current stability bound; the adaptive run
    loop in run_lorenz chooses it automatically.
    """
    bound = stable_dt_bound_lorenz(curve, coeffs)
    if not 0 < dt <= bound * (1.0 + 1e-12):
        raise ValidationError(
            f"dt {dt!r} outside (0, {bound!r}] for the current curve"
        )
    slopes = curve.slopes()
    eps = curvature_floor(slopes)
    dpro = transformed_diffusion_profile(curve, coeffs, slopes=slopes)
    drift_arr = transformed_drift_profile(curve, coeffs)
    out, dt_used, floor_frac, min_sec = _kernels.lorenz_step(
        curve.values, dpro, drift_arr, curve.df, dt, CFL_LORENZ, eps)
    if floor_frac > MAX_FLOOR_FRACTION:
        raise StabilityError(
            f"curvature floor active on {floor_frac:.0%} of nodes; "
            "the curve is under-resolved on this f-grid"
        )
    t_new = curve.time + dt_used
    out[-1] = _policy_fn(right_boundary, curve.right_boundary)(t_new)
    return curve.with_values(out, time=t_new)


def run_lorenz(config: LorenzRunConfig) -> tuple[list[LorenzCurve], MetricSeries]:
    """Integrate to t_end with adaptive steps, recording at the cadence."""
    curve0 = config.initial
    coeffs = config.coeffs
    df = curve0.df
    fgrid = curve0.fgrid
    n = curve0.f_count
    boundary = _policy_fn(config.right_boundary, curve0.right_boundary)
    prescribed = callable(config.right_boundary)
    values = curve0.values.copy()
    out = np.empty(n)
    dpro = np.empty(n)
    is_constant_d = not coeffs.nonlocal_diffusion
    if is_constant_d:
        dpro[:] = coeffs.diffusion.value
    drift_free = coeffs.drift_free
    if not drift_free:
        rate = coeffs.drift.rate
        target = coeffs.drift.target
    times = config.record_times()
    collapse_dt = 1e-15 * max(config.t_end, 1.0)
    steps_taken = 0

    def snapshot(t: float) -> LorenzCurve:
        return LorenzCurve(fgrid, values, time=t, domain=curve0.domain)

    def metrics_row(curve: LorenzCurve) -> dict:
        slopes = central_slopes(curve.values, df)
        mean = curve.right_boundary
        second_moment = float(np.trapezoid(slopes * slopes, fgrid))
        row = {
            "time": curve.time,
            "mean": mean,
            "std": math.sqrt(max(second_moment - mean * mean, 0.0)),
            "convexity_margin": curve.convexity_margin,
        }
        if curve.domain is Domain.POSITIVE and mean > 0:
            unit = curve if abs(mean - 1.0) <= TOL_UNIT else curve.normalized()
            if abs(unit.right_boundary - 1.0) <= TOL_UNIT:
                row["gini"] = gini_from_lorenz(unit)
                row["hoover"] = hoover_from_lorenz(unit)
        return row

    snapshots = [snapshot(times[0])]
    rows = [metrics_row(snapshots[0])]
    for t_a, t_b in zip(times[:-1], times[1:]):
        t = t_a
        while t < t_b - 1e-12 * max(t_b, 1.0):
            if steps_taken >= config.max_steps:
                raise StabilityError(
                    f"exceeded max_steps={config.max_steps} before t_end; "
                    "the adaptive step has stalled"
                )
            slopes = central_slopes(values, df)
            eps = config.floor_scale * float(np.max(np.abs(slopes)))
            if not is_constant_d:
                _kernels.yardsale_lorenz_profile(
                    slopes, df, coeffs.diffusion.intensity, out=dpro)
            drift_arr = None
            if not drift_free:
                drift_arr = rate * (target * fgrid - values)
            dt_max = t_b - t
            if config.dt_cap is not None and config.dt_cap < dt_max:
                dt_max = config.dt_cap
            _, dt_used, floor_frac, min_sec = _kernels.lorenz_step(
                values, dpro, drift_arr, df, dt_max, config.cfl, eps, out=out)
            if floor_frac > config.max_floor_fraction:
                raise StabilityError(
                    f"curvature floor active on {floor_frac:.0%} of nodes "
                    f"at t={t:.6g}; the curve is under-resolved"
                )
            if dt_used < dt_max and dt_used < collapse_dt:
                raise StabilityError(
                    f"adaptive step collapsed to {dt_used:.3e} at t={t:.6g}; "
                    "a curvature floor hit is driving the bound to zero"
                )
            t += dt_used
            if prescribed:
                out[-1] = boundary(t)
                min_sec = float(np.min(out[2:] - 2.0 * out[1:-1] + out[:-2]))
            if min_sec < -TOL_CONVEX:
                raise StabilityError(
                    f"convexity violated after the step at t={t:.6g}: "
                    f"margin {min_sec:.3e}"
                )
            values, out = out, values
            steps_taken += 1
        values[-1] = boundary(t_b)
        snap = snapshot(t_b)
        snapshots.append(snap)
        rows.append(metrics_row(snap))
    return snapshots, MetricSeries.from_rows(rows)


def pde_residual(curve_prev: LorenzCurve, curve_next: LorenzCurve,
                 dt: float, coeffs) -> np.ndarray:
    """Discrete residual of the curve dynamics over interior f nodes.

    Evaluates (next - prev)/dt + Dt/L_ff - drift at the midpoint curve;
    near zero (up to truncation error) when the pair really is one step or
    one sampling interval of the dynamics.
    """
    if curve_prev.f_count != curve_next.f_count:
        raise ValidationError("curves must share an f-grid")
    if not dt > 0:
        raise ValidationError("dt must be positive")
    mid = curve_prev.with_values(
        0.5 * (curve_prev.values + curve_next.values),
        time=0.5 * (curve_prev.time + curve_next.time))
    slopes = mid.slopes()
    lff = interior_curvature(mid.values, mid.df, curvature_floor(slopes))
    dpro = transformed_diffusion_profile(mid, coeffs, slopes=slopes)
    rate = (curve_next.values - curve_prev.values) / dt
    residual = rate[1:-1] + dpro[1:-1] / lff
    drift_arr = transformed_drift_profile(mid, coeffs)
    if drift_arr is not None:
        residual -= drift_arr[1:-1]
    return residual
