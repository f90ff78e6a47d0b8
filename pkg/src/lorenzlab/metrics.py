"""Inequality metrics, each computable from either representation.

The density-side and curve-side formulas are independent routes to the same
quantities; tests hold them against each other, so neither may be defined in
terms of the other.
"""
from __future__ import annotations

import numpy as np

from .coefficients import CoefficientSpec, diffusion_profile, \
    transformed_diffusion_profile
from .errors import ValidationError
from .fields import DensityField, Domain, LorenzCurve
from .numerics import curvature_floor, interior_curvature, trapezoid

#: how close mass and mean must sit to 1 for the unit-normalized formulas
TOL_UNIT = 1e-3


def _require_unit_curve(curve: LorenzCurve, what: str) -> None:
    if curve.domain is not Domain.POSITIVE:
        raise ValidationError(f"{what} requires a positive-support curve")
    if abs(curve.right_boundary - 1.0) > TOL_UNIT:
        raise ValidationError(
            f"{what} requires a unit-mean curve; right boundary is "
            f"{curve.right_boundary!r} (call .normalized() first)"
        )


def gini_from_lorenz(curve: LorenzCurve) -> float:
    """Twice the area between the equality diagonal and the curve."""
    _require_unit_curve(curve, "gini_from_lorenz")
    f = curve.fgrid
    return 2.0 * trapezoid(f - curve.values, f)


def hoover_from_lorenz(curve: LorenzCurve) -> float:
    """Largest vertical gap between the equality diagonal and the curve."""
    _require_unit_curve(curve, "hoover_from_lorenz")
    return float(np.max(curve.fgrid - curve.values))


def _trapezoid_weights(x: np.ndarray) -> np.ndarray:
    w = np.empty_like(x)
    w[1:-1] = 0.5 * (x[2:] - x[:-2])
    w[0] = 0.5 * (x[1] - x[0])
    w[-1] = 0.5 * (x[-1] - x[-2])
    return w


def gini_from_density(density: DensityField) -> float:
    """1 - E[min(W, Y)] for independent W, Y drawn from the density.

    The double trapezoid sum is evaluated in prefix form: the kink of
    min(w, y) sits on the diagonal node, so splitting the inner sum there
    is an exact rearrangement, and the evaluation stays O(n).
    """
    if density.grid.domain is not Domain.POSITIVE:
        raise ValidationError("gini_from_density requires positive support")
    if abs(density.mass - 1.0) > TOL_UNIT:
        raise ValidationError("gini_from_density requires unit mass")
    mean = density.mean
    if abs(mean - 1.0) > TOL_UNIT:
        raise ValidationError(
            f"gini_from_density requires unit mean, got {mean!r}"
        )
    x = density.grid.nodes
    g = _trapezoid_weights(x) * density.values
    gx = g * x
    inner_below = np.empty_like(g)
    inner_below[0] = 0.0
    np.cumsum(gx[:-1], out=inner_below[1:])
    at_or_above = np.cumsum(g[::-1])[::-1]
    expected_min = float(np.sum(g * (inner_below + x * at_or_above)))
    return 1.0 - expected_min


def _require_drift_free(coeffs, what: str) -> None:
    if isinstance(coeffs, CoefficientSpec) and not coeffs.drift_free:
        raise ValidationError(f"{what} applies to drift-free dynamics only")


def gini_rate_density(density: DensityField, coeffs) -> float:
    """Instantaneous d(Gini)/dt from the density: 2 * int D rho^2 dx."""
    _require_drift_free(coeffs, "gini_rate_density")
    dpro = diffusion_profile(coeffs, density)
    rho = density.values
    return 2.0 * trapezoid(dpro * rho * rho, density.grid.nodes)


def gini_rate_lorenz(curve: LorenzCurve, coeffs) -> float:
    """Instantaneous d(Gini)/dt from the curve: 2 * int Dt / L_ff df.

    Uses the solver's curvature convention (central stencils reaching the
    boundary values, floored) so the rate matches what the integrator
    actually does.  Non-convex curves cannot be constructed, so the
    convexity precondition is enforced by the type.
    """
    _require_drift_free(coeffs, "gini_rate_lorenz")
    slopes = curve.slopes()
    dpro = transformed_diffusion_profile(curve, coeffs, slopes=slopes)
    lff = interior_curvature(curve.values, curve.df, curvature_floor(slopes))
    integrand = np.empty(curve.f_count)
    integrand[1:-1] = dpro[1:-1] / lff
    integrand[0] = integrand[1]
    integrand[-1] = integrand[-2]
    return 2.0 * trapezoid(integrand, curve.fgrid)
