"""Transforms between densities, CDFs, and Lorenz curves.

The Lorenz curve of a density rho(x) is the incomplete first moment plotted
against the incomplete zeroth moment: parametrically (F(x), L(x)) with
F' = rho and L' = x rho.  Its slope at cumulative fraction f is the quantile
x(f), and its curvature is 1/rho at that quantile, which is what makes the
curve convex and the transform invertible for strictly positive densities.

Resampling onto the uniform f grid interpolates the quantile x as a monotone
piecewise cubic in F and integrates it exactly (the antiderivative of a
nondecreasing interpolant), so the resampled curve is convex by construction
and round trips at second order.  Plain cubic splines would do neither.
"""
from __future__ import annotations

import warnings

import numpy as np
from scipy.interpolate import PchipInterpolator

from .errors import ValidationError
from .fields import (
    DUPLICATE_F_TOL,
    DensityField,
    Domain,
    LorenzCurve,
    SampledCDF,
    SpatialGrid,
)
from .numerics import cumulative_trapezoid

#: population required on both sides of a collapsed plateau before it
#: counts as an interior dead zone worth warning about
_WARN_MASS = 1e-6


def cdf_from_density(density: DensityField) -> SampledCDF:
    """Prefix trapezoid of the density; starts at exactly 0."""
    vals = cumulative_trapezoid(density.values, density.grid.nodes)
    return SampledCDF(density.grid, vals, time=density.time)


def incomplete_first_moment(density: DensityField) -> np.ndarray:
    """Prefix trapezoid of x * rho(x); last entry is the mean."""
    x = density.grid.nodes
    return cumulative_trapezoid(x * density.values, x)


def _collapse_duplicates(F: np.ndarray, x: np.ndarray):
    """Drop parametric points whose F advanced by less than DUPLICATE_F_TOL.

    Zero-density plateaus produce vertical runs in (F, x) where the
    quantile is set-valued.  Keep the support-side representative: the
    last point of the leading run and the first point of every later run,
    so Q(0) and Q(1) land on the essential infimum and supremum of the
    support rather than the grid edges.

    Drops near the support edges (leading or trailing tail dust) are
    routine and collapse silently; a plateau with at least _WARN_MASS of
    population on each side is an interior dead zone, usually an input
    mistake, and raises a RuntimeWarning.
    """
    n = F.size
    start = 1
    while start < n and F[start] - F[0] <= DUPLICATE_F_TOL:
        start += 1
    start -= 1
    keep = np.zeros(n, dtype=bool)
    keep[start] = True
    last = F[start]
    for k in range(start + 1, n):
        if F[k] - last > DUPLICATE_F_TOL:
            keep[k] = True
            last = F[k]
    interior = (~keep) & (F - F[0] > _WARN_MASS) & (F[-1] - F > _WARN_MASS)
    if np.any(interior):
        warnings.warn(
            f"collapsed {int(np.count_nonzero(interior))} duplicate CDF "
            "values (interior zero-density plateau)",
            RuntimeWarning, stacklevel=3,
        )
    return F[keep], x[keep]


def quantile_interpolator(cdf: SampledCDF) -> PchipInterpolator:
    """Monotone piecewise-cubic x(F); the inverse CDF of the samples."""
    F = cdf.values.copy()
    F[-1] = 1.0  # normalized mass; kill the trailing quadrature ulp
    F[0] = 0.0
    F, x = _collapse_duplicates(F, cdf.grid.nodes.copy())
    if F.size < 3:
        raise ValidationError("CDF collapses to fewer than 3 distinct points")
    # collapse keeps interior representatives of the end plateaus; pin the
    # parameter range back to exactly [0, 1]
    F[0] = 0.0
    F[-1] = 1.0
    return PchipInterpolator(F, x, extrapolate=False)


def lorenz_from_density(density: DensityField, f_count: int) -> LorenzCurve:
    """Resample the parametric (F, L) relation onto a uniform f grid.

    The quantile interpolant is integrated exactly; a linear-in-f correction
    then pins the right boundary to the trapezoid mean of the input.  Adding
    a linear function leaves second differences (and so convexity) intact,
    and unlike a multiplicative rescale it is safe for near-zero means.
    """
    if f_count < 3:
        raise ValidationError("f_count must be at least 3")
    q = quantile_interpolator(cdf_from_density(density))
    anti = q.antiderivative()
    fgrid = np.linspace(0.0, 1.0, f_count)
    vals = anti(fgrid)
    vals[0] = 0.0
    total = float(incomplete_first_moment(density)[-1])
    vals += (total - float(vals[-1])) * fgrid
    vals[-1] = total
    return LorenzCurve(fgrid, vals, time=density.time, domain=density.grid.domain)


def density_from_lorenz(curve: LorenzCurve) -> DensityField:
    """Invert a strictly convex curve back to a density.

    Node positions are the discrete slopes, values the reciprocal discrete
    curvature.  The two boundary nodes reuse the nearest interior curvature
    (their density is negligible for resolved curves).

    The reconstruction has unit mass exactly in its own quantile measure:
    every population cell carries 1/(n-1) by construction.  The trapezoid
    estimate of the same integral over the stretched node positions is only
    first-order accurate in the tails, so its defect is recorded as
    ``mass_error`` but not divided out; rescaling accurate interior values
    by an inaccurate quadrature would shift all of them by the defect.
    """
    v = curve.values
    df = curve.df
    sec = v[2:] - 2.0 * v[1:-1] + v[:-2]
    if np.min(sec) <= 0.0:
        raise ValidationError(
            "curve is not strictly convex; density reconstruction undefined"
        )
    x = np.empty(v.size)
    x[1:-1] = (v[2:] - v[:-2]) / (2.0 * df)
    x[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * df)
    x[-1] = (3.0 * v[-1] - 4.0 * v[-2] + v[-3]) / (2.0 * df)
    rho = np.empty(v.size)
    rho[1:-1] = df * df / sec
    rho[0] = rho[1]
    rho[-1] = rho[-2]
    if not np.all(np.diff(x) > 0):
        raise ValidationError("reconstructed quantiles are not increasing")
    if curve.domain is Domain.POSITIVE and x[0] < 0:
        # the end node is a one-sided estimate of the essential infimum;
        # an overshoot small against the first cell is discretization noise
        if x[0] > -0.1 * (x[1] - x[0]):
            x[0] = 0.0
        else:
            raise ValidationError("positive-support curve yielded negative wealth")
    grid = SpatialGrid(x, curve.domain)
    raw_mass = float(np.trapezoid(rho, x))
    # 5% slack: a defect beyond that means the curve was unresolved, not
    # that the quadrature disagreed with the quantile measure
    return DensityField(grid, rho, time=curve.time,
                        mass_error=abs(raw_mass - 1.0),
                        normalize=False, mass_slack=0.05)
