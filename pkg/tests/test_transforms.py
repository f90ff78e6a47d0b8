"""Density <-> curve transform pair.

The uniform distribution anchors everything: its curve is exactly f^2 and
its quantile 2f, so both directions have closed-form targets.  Round-trip
error must shrink at second order, checked against frozen pilot values.
"""
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from lorenzlab import (
    Domain,
    LorenzCurve,
    SpatialGrid,
    ValidationError,
    cdf_from_density,
    density_from_lorenz,
    gaussian_density,
    incomplete_first_moment,
    lognormal_density,
    lorenz_from_density,
    uniform_density,
)
from lorenzlab.numerics import trapezoid


def test_cdf_endpoints(unit_uniform):
    cdf = cdf_from_density(unit_uniform)
    assert cdf.values[0] == 0.0
    assert cdf.values[-1] == pytest.approx(1.0, abs=1e-12)
    assert np.all(np.diff(cdf.values) >= 0.0)


def test_incomplete_first_moment_total(unit_gaussian, unit_uniform):
    partial = incomplete_first_moment(unit_gaussian)
    assert partial[-1] == pytest.approx(unit_gaussian.mean, abs=1e-12)
    # monotone only where x >= 0, so check on the positive-domain density
    grows = incomplete_first_moment(unit_uniform)
    assert np.all(np.diff(grows) >= 0.0)


def test_uniform_curve_is_f_squared(unit_uniform):
    curve = lorenz_from_density(unit_uniform, 513)
    f = curve.fgrid
    assert_allclose(curve.values, f * f, atol=5e-5)
    assert curve.right_boundary == 1.0


def test_curve_rescales_with_mean(positive_grid):
    # scaling wealth by c scales the (unnormalized) curve by c
    d1 = uniform_density(positive_grid, 0.0, 2.0)
    d2 = uniform_density(positive_grid, 0.0, 4.0)
    c1 = lorenz_from_density(d1, 257)
    c2 = lorenz_from_density(d2, 257)
    assert_allclose(c2.values, 2.0 * c1.values, atol=1e-4)


def test_density_from_quadratic_curve(quadratic_curve):
    density = density_from_lorenz(quadratic_curve)
    # quantile of f^2 is 2f: uniform density 1/2 on [0, 2]
    inner = (density.grid.nodes > 0.15) & (density.grid.nodes < 1.85)
    assert_allclose(density.values[inner], 0.5, rtol=2e-2)


def test_density_from_lorenz_rejects_flat_curve():
    f = np.linspace(0.0, 1.0, 65)
    with pytest.raises(ValidationError):
        density_from_lorenz(LorenzCurve(f, f.copy(), domain=Domain.POSITIVE))


def _trip_error(density, n, exact):
    """Relative L1 distance of the recovered density from the analytic
    one, over the central 98% of the population.  The outermost quantile
    cells are unresolvable at any fixed resolution; a window that moved
    with n would blur the refinement ratio."""
    curve = lorenz_from_density(density, n + 1)
    back = density_from_lorenz(curve)
    f = curve.fgrid
    win = (f >= 0.01) & (f <= 0.99)
    x, r = back.grid.nodes[win], back.values[win]
    ref = exact(x)
    return trapezoid(np.abs(r - ref), x) / trapezoid(ref, x)


def test_round_trip_second_order():
    """Frozen pilot values: gaussian error 2.299e-5 at 512 nodes and a
    512->1024 refinement ratio of 4.08, squarely second order."""
    sigma = 1.0

    def pdf(x):
        z = (x - 1.0) / sigma
        return np.exp(-z * z / 2) / (sigma * np.sqrt(2 * np.pi))

    errs = {}
    for n in (512, 1024):
        grid = SpatialGrid.uniform(-4.0, 6.0, n)
        density = gaussian_density(grid, 1.0, sigma, zero_boundary=False)
        errs[n] = _trip_error(density, n, pdf)
        assert errs[n] <= 10.0 * grid.dx ** 2
    assert errs[512] == pytest.approx(2.299e-5, rel=0.05)
    assert 3.0 <= errs[512] / errs[1024] <= 5.0


def test_round_trip_uniform_is_exact():
    # the quantile of a uniform density is linear, which pchip reproduces
    # exactly, so the only error left is roundoff
    for n in (512, 1024):
        grid = SpatialGrid.uniform(0.0, 2.0, n, Domain.POSITIVE)
        density = uniform_density(grid, 0.0, 2.0)
        err = _trip_error(density, n, lambda x: np.full_like(x, 0.5))
        assert err < 1e-9


def test_duplicate_cdf_plateau_warns(positive_grid):
    # density with an interior dead zone produces a flat CDF stretch
    vals = np.where((positive_grid.nodes < 1.0)
                    | (positive_grid.nodes > 3.0), 1.0, 0.0)
    vals[positive_grid.nodes > 3.5] = 0.0
    from lorenzlab.fields import DensityField
    density = DensityField(positive_grid, vals)
    with pytest.warns(RuntimeWarning, match="duplicate"):
        curve = lorenz_from_density(density, 257)
    assert curve.right_boundary == pytest.approx(density.mean, abs=1e-12)
    assert np.all(np.diff(curve.values) >= 0.0)


@settings(max_examples=25, deadline=None)
@given(mean=st.floats(0.5, 3.0), std=st.floats(0.05, 0.4))
def test_curve_from_gaussian_is_convex_with_unit_boundary(mean, std):
    grid = SpatialGrid.uniform(mean - 6 * std, mean + 6 * std, 513)
    curve = lorenz_from_density(gaussian_density(grid, mean, std), 257)
    assert curve.convexity_margin >= -1e-10
    assert curve.right_boundary == pytest.approx(mean, rel=1e-9)


def test_end_plateau_collapses_silently(positive_grid):
    # truncated support is routine and must not trip the dead-zone warning
    density = uniform_density(positive_grid, 0.0, 2.0)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        lorenz_from_density(density, 129)


@settings(max_examples=15, deadline=None)
@given(f_count=st.integers(65, 600))
def test_round_trip_preserves_mass(f_count):
    grid = SpatialGrid.uniform(0.0, 4.0, 257, Domain.POSITIVE)
    curve = lorenz_from_density(uniform_density(grid, 0.0, 2.0), f_count)
    back = density_from_lorenz(curve)
    # residual defect is end-cell quadrature junk; its size depends on how
    # the f grid lands on the support edge, not smoothly on f_count
    assert back.mass == pytest.approx(1.0, abs=1e-3)
    assert back.mass_error == pytest.approx(abs(back.mass - 1.0), rel=1e-9)
