"""Drift and diffusion coefficient menu, on both sides of the transform.

Each coefficient has two evaluation routes: a scalar one (direct quadrature,
used by tests and diagnostics) and a whole-profile one backed by the kernel
layer (prefix sums, used by the solvers).  The routes are deliberately
independent computations; their agreement is one of the package's standing
cross-checks, so do not fold one into the other.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

import numpy as np

from . import _kernels
from .errors import ValidationError
from .fields import DensityField, Domain, LorenzCurve
from .numerics import trapezoid


@dataclass(frozen=True)
class ZeroDrift:
    """No advection; diffusion-only dynamics."""


@dataclass(frozen=True)
class OUDrift:
    """Linear restoring drift rate * (target - x).

    ``rate`` is the relaxation rate toward the attracting mean ``target``.
    """

    rate: float
    target: float

    def __post_init__(self):
        if not self.rate > 0:
            raise ValidationError("OUDrift rate must be positive")


@dataclass(frozen=True)
class ConstantDiffusion:
    """State-independent diffusion coefficient, value > 0."""

    value: float

    def __post_init__(self):
        if not self.value > 0:
            raise ValidationError("diffusion value must be positive")


@dataclass(frozen=True)
class YardSaleDiffusion:
    """Nonlocal wealth-exchange diffusion.

    ``intensity`` is the transaction intensity, strictly inside (0, 1): each
    exchange moves a fraction intensity**0.5 * eta of the poorer party's
    wealth.  The induced diffusion coefficient is
    D(w) = (intensity/2) * E[min(w, X)^2] under the current density.
    """

    intensity: float

    def __post_init__(self):
        if not 0.0 < self.intensity < 1.0:
            raise ValidationError("intensity must lie strictly inside (0, 1)")


Drift = Union[ZeroDrift, OUDrift]
Diffusion = Union[ConstantDiffusion, YardSaleDiffusion]


@dataclass(frozen=True)
class CoefficientSpec:
    """Composite (drift, diffusion) choice shared by every solver."""

    diffusion: Diffusion
    drift: Drift = field(default_factory=ZeroDrift)

    def __post_init__(self):
        if not isinstance(self.diffusion, (ConstantDiffusion, YardSaleDiffusion)):
            raise ValidationError(f"unknown diffusion {self.diffusion!r}")
        if not isinstance(self.drift, (ZeroDrift, OUDrift)):
            raise ValidationError(f"unknown drift {self.drift!r}")

    @property
    def drift_free(self) -> bool:
        return isinstance(self.drift, ZeroDrift)

    @property
    def nonlocal_diffusion(self) -> bool:
        """True when D depends on the current density (re-evaluate per step)."""
        return isinstance(self.diffusion, YardSaleDiffusion)


def _drift_of(coeffs) -> Drift:
    return coeffs.drift if isinstance(coeffs, CoefficientSpec) else coeffs


def _diffusion_of(coeffs) -> Diffusion:
    return coeffs.diffusion if isinstance(coeffs, CoefficientSpec) else coeffs


# ---------------------------------------------------------------------------
# density side

def eval_drift(coeffs, x, t: float = 0.0, density: DensityField | None = None):
    """Drift coefficient at position(s) x; elementwise for arrays.

    ``t`` and ``density`` are accepted for signature stability with
    time- or density-dependent drifts; the shipped menu uses neither.
    """
    drift = _drift_of(coeffs)
    if isinstance(drift, ZeroDrift):
        return np.zeros_like(x, dtype=float) if np.ndim(x) else 0.0
    if isinstance(drift, OUDrift):
        out = drift.rate * (drift.target - np.asarray(x, dtype=float))
        return out if np.ndim(x) else float(out)
    raise ValidationError(f"unknown drift {drift!r}")


def drift_profile(coeffs, nodes: np.ndarray) -> np.ndarray | None:
    """Drift at every node, or None for ZeroDrift (lets kernels skip it)."""
    drift = _drift_of(coeffs)
    if isinstance(drift, ZeroDrift):
        return None
    return eval_drift(drift, nodes)


def eval_yardsale_diffusion(density: DensityField, w: float,
                            intensity: float) -> float:
    """Wealth-exchange diffusion at a single wealth level, by direct quadrature.

    The kink of min(w, x) may fall inside a grid cell; the resulting local
    quadrature error is second order and acceptable for a diagnostic route.
    """
    if density.grid.domain is not Domain.POSITIVE:
        raise ValidationError("yard-sale diffusion requires positive support")
    if not 0.0 < intensity < 1.0:
        raise ValidationError("intensity must lie strictly inside (0, 1)")
    x = density.grid.nodes
    clipped = np.minimum(x, float(w))
    return 0.5 * intensity * trapezoid(clipped * clipped * density.values, x)


def diffusion_profile(coeffs, density: DensityField,
                      out: np.ndarray | None = None) -> np.ndarray:
    """Diffusion coefficient at every grid node of the density."""
    diff = _diffusion_of(coeffs)
    if isinstance(diff, ConstantDiffusion):
        if out is None:
            return np.full(density.grid.n, diff.value)
        out[:] = diff.value
        return out
    if isinstance(diff, YardSaleDiffusion):
        if density.grid.domain is not Domain.POSITIVE:
            raise ValidationError("yard-sale diffusion requires positive support")
        return _kernels.yardsale_density_profile(
            density.grid.nodes, density.values, diff.intensity, out)
    raise ValidationError(f"unknown diffusion {diff!r}")


# ---------------------------------------------------------------------------
# Lorenz side

def transformed_diffusion(curve: LorenzCurve, f_index: int, coeffs) -> float:
    """Transformed diffusion at one f node, by direct quadrature.

    For the yard-sale coefficient this evaluates
    (intensity/2) * int_0^1 min(slope(g), slope(f))^2 dg without exploiting
    the monotone-slope split; the kernel profile route does exploit it,
    which is exactly what makes the pair a useful cross-check.
    """
    diff = _diffusion_of(coeffs)
    if isinstance(diff, ConstantDiffusion):
        return diff.value
    if isinstance(diff, YardSaleDiffusion):
        if curve.domain is not Domain.POSITIVE:
            raise ValidationError("yard-sale diffusion requires positive support")
        slopes = curve.slopes()
        m = np.minimum(slopes, slopes[f_index])
        return 0.5 * diff.intensity * trapezoid(m * m, curve.fgrid)
    raise ValidationError(f"unknown diffusion {diff!r}")


def transformed_diffusion_profile(curve: LorenzCurve, coeffs,
                                  slopes: np.ndarray | None = None,
                                  out: np.ndarray | None = None) -> np.ndarray:
    """Transformed diffusion at every f node, kernel-backed.

    ``slopes`` lets the solver reuse an already-computed slope array.
    """
    diff = _diffusion_of(coeffs)
    if isinstance(diff, ConstantDiffusion):
        if out is None:
            return np.full(curve.f_count, diff.value)
        out[:] = diff.value
        return out
    if isinstance(diff, YardSaleDiffusion):
        if curve.domain is not Domain.POSITIVE:
            raise ValidationError("yard-sale diffusion requires positive support")
        if slopes is None:
            slopes = curve.slopes()
        return _kernels.yardsale_lorenz_profile(slopes, curve.df,
                                                diff.intensity, out)
    raise ValidationError(f"unknown diffusion {diff!r}")


def transformed_drift_integral(curve: LorenzCurve, f_index: int, coeffs) -> float:
    """int_0^f of the transformed drift, at one f node.

    The linear restoring drift reduces in closed form: integrating
    rate * (target - slope(g)) from 0 to f telescopes the slope integral
    into the curve itself, giving rate * (target * f - L(f)).
    """
    drift = _drift_of(coeffs)
    if isinstance(drift, ZeroDrift):
        return 0.0
    if isinstance(drift, OUDrift):
        f = float(curve.fgrid[f_index])
        return drift.rate * (drift.target * f - float(curve.values[f_index]))
    raise ValidationError(f"unknown drift {drift!r}")


def transformed_drift_profile(curve: LorenzCurve, coeffs) -> np.ndarray | None:
    """Transformed drift integral at every f node; None for ZeroDrift."""
    drift = _drift_of(coeffs)
    if isinstance(drift, ZeroDrift):
        return None
    if isinstance(drift, OUDrift):
        return drift.rate * (drift.target * curve.fgrid - curve.values)
    raise ValidationError(f"unknown drift {drift!r}")
