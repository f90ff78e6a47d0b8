"""Small quadrature and finite-difference helpers used across the package.

All cumulative sums run left to right so that results are reproducible
bit-for-bit against the compiled kernels, which accumulate in the same order.
"""
from __future__ import annotations

import numpy as np


def trapezoid(y: np.ndarray, x: np.ndarray) -> float:
    return float(np.trapezoid(y, x))


def cumulative_trapezoid(y: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Prefix trapezoid integral of ``y`` over ``x``; out[0] = 0."""
    out = np.empty_like(y, dtype=float)
    out[0] = 0.0
    np.cumsum(0.5 * (y[1:] + y[:-1]) * np.diff(x), out=out[1:])
    return out


def cumulative_trapezoid_uniform(y: np.ndarray, dx: float) -> np.ndarray:
    out = np.empty_like(y, dtype=float)
    out[0] = 0.0
    np.cumsum(0.5 * (y[1:] + y[:-1]) * dx, out=out[1:])
    return out


def central_slopes(values: np.ndarray, dx: float) -> np.ndarray:
    """First derivative: central differences inside, one-sided second order
    at the two ends."""
    v = values
    out = np.empty_like(v, dtype=float)
    out[1:-1] = (v[2:] - v[:-2]) / (2.0 * dx)
    out[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * dx)
    out[-1] = (3.0 * v[-1] - 4.0 * v[-2] + v[-3]) / (2.0 * dx)
    return out


def second_differences(values: np.ndarray) -> np.ndarray:
    """Raw central second differences at interior nodes (length n - 2)."""
    v = values
    return v[2:] - 2.0 * v[1:-1] + v[:-2]


def curvature_profile(values: np.ndarray, dx: float) -> np.ndarray:
    """Second derivative at every node.

    Interior nodes use central second differences; each end reuses the
    nearest interior value (the end values feed ratios that vanish there,
    so first-order accuracy suffices).
    """
    v = values
    out = np.empty_like(v, dtype=float)
    out[1:-1] = (v[2:] - 2.0 * v[1:-1] + v[:-2]) / (dx * dx)
    out[0] = out[1]
    out[-1] = out[-2]
    return out


#: curvature floor as a fraction of the largest slope magnitude
CURVATURE_FLOOR_SCALE = 1e-8


def curvature_floor(slopes: np.ndarray) -> float:
    return CURVATURE_FLOOR_SCALE * float(np.max(np.abs(slopes)))


def interior_curvature(values: np.ndarray, df: float,
                       eps_floor: float) -> np.ndarray:
    """Curve curvature on interior nodes, solver convention (length n - 2).

    Central second differences at every interior node; the stencils reach
    the boundary values but never difference across them.  Floored below
    at ``eps_floor``.  Mirrors the kernel stepper exactly; keep in sync.
    """
    v = values
    if v.size < 5:
        raise ValueError("interior curvature needs at least 5 nodes")
    sec = v[2:] - 2.0 * v[1:-1] + v[:-2]
    lff = sec / (df * df)
    return np.maximum(lff, eps_floor, out=lff)
