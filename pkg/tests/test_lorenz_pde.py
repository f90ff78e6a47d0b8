"""Curve-side integrator: analytic tracking, invariants, and guard rails.

The free-diffusion family and the restoring-drift stationary state give
closed-form targets; the yard-sale run checks the qualitative laws (Gini
monotone up, convexity preserved, boundary pinned).
"""
import math

import numpy as np
import pytest

from lorenzlab import (
    CoefficientSpec,
    ConstantDiffusion,
    Domain,
    LorenzCurve,
    OUDrift,
    OUParams,
    SpatialGrid,
    StabilityError,
    ValidationError,
    YardSaleDiffusion,
    gaussian_lorenz,
    lognormal_density,
    lorenz_from_density,
)
from lorenzlab.lorenz_pde import (
    LorenzRunConfig,
    pde_residual,
    run_lorenz,
    stable_dt_bound_lorenz,
    step_lorenz,
)

F257 = np.linspace(0.0, 1.0, 257)
HEAT = CoefficientSpec(ConstantDiffusion(1.0))


def heat_curve(f, std):
    return LorenzCurve(f, gaussian_lorenz(f, 1.0, std),
                       domain=Domain.REAL_LINE)


def test_tracks_spreading_gaussian():
    start = heat_curve(F257, 0.05)
    snaps, _ = run_lorenz(LorenzRunConfig(start, HEAT, t_end=0.01))
    exact = gaussian_lorenz(F257, 1.0, 0.15)
    assert float(np.max(np.abs(snaps[-1].values - exact))) < 5e-4


def test_boundaries_pinned():
    start = heat_curve(F257, 0.05)
    snaps, _ = run_lorenz(LorenzRunConfig(start, HEAT, t_end=0.005))
    for snap in snaps:
        assert snap.values[0] == 0.0
        assert snap.right_boundary == start.right_boundary


def test_ou_stationary_curve_stays_put():
    # std sqrt(D / rate) = 0.5 balances contraction against diffusion
    f = np.linspace(0.0, 1.0, 513)
    stat = LorenzCurve(f, gaussian_lorenz(f, 2.0, 0.5),
                       domain=Domain.REAL_LINE)
    coeffs = CoefficientSpec(ConstantDiffusion(0.25), OUDrift(1.0, 2.0))
    snaps, _ = run_lorenz(LorenzRunConfig(stat, coeffs, t_end=0.2))
    assert float(np.max(np.abs(snaps[-1].values - stat.values))) < 2e-4


def test_yardsale_gini_monotone_and_convex():
    grid = SpatialGrid.uniform(0.0, 12.0, 513, Domain.POSITIVE)
    curve = lorenz_from_density(lognormal_density(grid, 0.5), 257)
    coeffs = CoefficientSpec(YardSaleDiffusion(0.2))
    snaps, series = run_lorenz(LorenzRunConfig(curve, coeffs, t_end=0.5))
    assert np.all(np.diff(series.gini) > -1e-6)
    assert series.gini[-1] > series.gini[0]
    assert float(np.min(series.convexity_margin)) >= -1e-10
    assert snaps[-1].right_boundary == curve.right_boundary


def test_pde_residual_on_analytic_pair():
    f = np.linspace(0.0, 1.0, 513)
    h = 1e-5
    t = 0.02

    def at(tt):
        return LorenzCurve(f, gaussian_lorenz(f, 1.0,
                                              math.sqrt(0.05 ** 2 + 2 * tt)),
                           time=tt, domain=Domain.REAL_LINE)

    res = pde_residual(at(t), at(t + h), h, HEAT)
    # edges are dominated by the curvature floor; judge the interior
    assert float(np.max(np.abs(res[20:-20]))) < 1e-3


def test_step_respects_bound():
    start = heat_curve(F257, 0.1)
    bound = stable_dt_bound_lorenz(start, HEAT)
    assert bound > 0
    with pytest.raises(ValidationError, match="outside"):
        step_lorenz(start, HEAT, 2.0 * bound)
    stepped = step_lorenz(start, HEAT, 0.5 * bound)
    assert stepped.time == pytest.approx(0.5 * bound)
    assert stepped.convexity_margin >= -1e-12


def test_under_resolved_curve_trips_floor():
    # piecewise linear is convex but flat-curved: the floor covers every node
    f = np.linspace(0.0, 1.0, 257)
    vals = np.where(f < 0.5, 0.5 * f, 1.5 * f - 0.5)
    kinked = LorenzCurve(f, vals, domain=Domain.POSITIVE)
    with pytest.raises(StabilityError, match="floor"):
        step_lorenz(kinked, HEAT, stable_dt_bound_lorenz(kinked, HEAT))


def test_max_steps_guard():
    start = heat_curve(F257, 0.05)
    config = LorenzRunConfig(start, HEAT, t_end=0.01, max_steps=3)
    with pytest.raises(StabilityError, match="max_steps"):
        run_lorenz(config)


def test_fixed_boundary_value_must_match():
    start = heat_curve(F257, 0.1)
    LorenzRunConfig(start, HEAT, t_end=0.001,
                    right_boundary=start.right_boundary)
    with pytest.raises(ValidationError, match="disagrees"):
        LorenzRunConfig(start, HEAT, t_end=0.001, right_boundary=2.0)


def test_prescribed_mean_path_is_followed():
    params = OUParams(rate=1.0, target=2.0, diffusion=0.25, initial_mean=1.0)
    f = np.linspace(0.0, 1.0, 257)
    start = LorenzCurve(f, gaussian_lorenz(f, 1.0, 0.3),
                        domain=Domain.REAL_LINE)
    coeffs = CoefficientSpec(ConstantDiffusion(0.25), OUDrift(1.0, 2.0))
    config = LorenzRunConfig(start, coeffs, t_end=0.1,
                             right_boundary=params.mean)
    snaps, series = run_lorenz(config)
    for snap in snaps:
        assert snap.right_boundary == pytest.approx(params.mean(snap.time),
                                                    rel=1e-12)
    assert series.mean[-1] > series.mean[0]  # relaxing upward toward 2


def test_config_rejections():
    start = heat_curve(F257, 0.1)
    with pytest.raises(ValidationError):
        LorenzRunConfig(start, HEAT, t_end=-0.1)
    with pytest.raises(ValidationError):
        LorenzRunConfig(start, HEAT, t_end=0.1, cfl=1.5)
    with pytest.raises(ValidationError):
        LorenzRunConfig(start, HEAT, t_end=0.1, dt_cap=0.0)
    with pytest.raises(ValidationError):
        LorenzRunConfig(start, HEAT, t_end=0.1, max_steps=0)
    f5 = np.linspace(0.0, 1.0, 4)
    with pytest.raises(ValidationError):
        LorenzRunConfig(LorenzCurve(f5, 1.0 * f5), HEAT, t_end=0.1)


def test_dt_cap_limits_steps():
    start = heat_curve(F257, 0.1)
    cap = 1e-6
    snaps, _ = run_lorenz(LorenzRunConfig(start, HEAT, t_end=1e-5,
                                          dt_cap=cap, record_every=1e-5))
    assert snaps[-1].time == pytest.approx(1e-5, rel=1e-9)
