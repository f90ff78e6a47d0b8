"""Inequality metrics, held against closed forms and against each other.

The uniform density on [0, 2] anchors the exact values (Gini 1/3, Hoover
1/4), the lognormal anchors the cross-formula agreement at its erf(sigma/2)
closed form, and the instantaneous Gini rate is checked density-side against
curve-side.
"""
import numpy as np
import pytest
from scipy.special import erf

from lorenzlab import (
    CoefficientSpec,
    ConstantDiffusion,
    Domain,
    OUDrift,
    SpatialGrid,
    ValidationError,
    YardSaleDiffusion,
    gini_from_density,
    gini_from_lorenz,
    gini_rate_density,
    gini_rate_lorenz,
    hoover_from_lorenz,
    lognormal_density,
    lorenz_from_density,
    uniform_density,
)


@pytest.fixture(scope="module")
def uniform_pair():
    grid = SpatialGrid.uniform(0.0, 4.0, 257, Domain.POSITIVE)
    density = uniform_density(grid, 0.0, 2.0)
    return density, lorenz_from_density(density, 257)


def test_gini_uniform_closed_form(uniform_pair):
    density, curve = uniform_pair
    assert gini_from_density(density) == pytest.approx(1 / 3, abs=5e-5)
    assert gini_from_lorenz(curve) == pytest.approx(1 / 3, abs=5e-5)


def test_hoover_uniform_closed_form(uniform_pair):
    _, curve = uniform_pair
    # sup_f (f - f^2) = 1/4 at f = 1/2
    assert hoover_from_lorenz(curve) == pytest.approx(0.25, abs=5e-5)


def test_gini_cross_formula_lognormal():
    # closed form: erf(sigma / 2); both routes must sit within tol_gini of
    # it and of each other at 512 cells
    grid = SpatialGrid.uniform(0.0, 12.0, 513, Domain.POSITIVE)
    density = lognormal_density(grid, 0.5)
    exact = float(erf(0.25))
    by_density = gini_from_density(density)
    by_curve = gini_from_lorenz(lorenz_from_density(density, 513))
    assert by_density == pytest.approx(exact, abs=1e-3)
    assert by_curve == pytest.approx(exact, abs=1e-3)
    assert abs(by_density - by_curve) <= 1e-3


def test_gini_requires_unit_normalization(uniform_pair):
    density, curve = uniform_pair
    doubled = uniform_density(density.grid, 0.0, 4.0)  # mean 2
    with pytest.raises(ValidationError, match="unit mean"):
        gini_from_density(doubled)
    wide = lorenz_from_density(doubled, 129)
    with pytest.raises(ValidationError, match="unit-mean"):
        gini_from_lorenz(wide)
    assert gini_from_lorenz(wide.normalized()) == pytest.approx(1 / 3, abs=1e-4)
    with pytest.raises(ValidationError, match="unit-mean"):
        hoover_from_lorenz(wide)


def test_gini_rejects_real_line(real_grid, unit_gaussian):
    with pytest.raises(ValidationError, match="positive"):
        gini_from_density(unit_gaussian)


def test_gini_rate_constant_diffusion(uniform_pair):
    # 2 int D rho^2 dx = D for the unit-mean uniform; the curve route
    # 2 int D / L_ff df gives the same because L_ff = 2 exactly
    density, curve = uniform_pair
    coeffs = CoefficientSpec(ConstantDiffusion(0.8))
    by_density = gini_rate_density(density, coeffs)
    by_curve = gini_rate_lorenz(curve, coeffs)
    assert by_density == pytest.approx(0.8, rel=3e-3)
    assert by_curve == pytest.approx(0.8, rel=3e-3)
    assert by_density == pytest.approx(by_curve, rel=1e-3)


def test_gini_rate_yardsale_routes_agree(uniform_pair):
    density, curve = uniform_pair
    coeffs = CoefficientSpec(YardSaleDiffusion(0.1))
    by_density = gini_rate_density(density, coeffs)
    by_curve = gini_rate_lorenz(curve, coeffs)
    assert by_density > 0
    assert by_density == pytest.approx(by_curve, rel=5e-3)


def test_gini_rate_rejects_drift(uniform_pair):
    density, curve = uniform_pair
    coeffs = CoefficientSpec(ConstantDiffusion(1.0), OUDrift(1.0, 1.0))
    with pytest.raises(ValidationError, match="drift-free"):
        gini_rate_density(density, coeffs)
    with pytest.raises(ValidationError, match="drift-free"):
        gini_rate_lorenz(curve, coeffs)


def test_gini_scale_invariance():
    # Gini of a sample is scale-free: densities differing by a wealth
    # rescale give the same value once normalized
    grid = SpatialGrid.uniform(0.0, 8.0, 513, Domain.POSITIVE)
    narrow = lognormal_density(grid, 0.3)
    curve = lorenz_from_density(narrow, 257)
    stretched = curve.with_values(3.0 * curve.values)
    assert gini_from_lorenz(stretched.normalized()) == pytest.approx(
        gini_from_lorenz(curve), abs=1e-10)
