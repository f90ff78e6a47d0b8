"""Closed-form solutions used as oracles by the solvers and tests.

Gaussian densities have Lorenz curves in closed form: curve(f) =
mean * f - std * phi(z(f)) with z(f) the standard normal quantile and phi
the standard normal pdf.  The bump enters with a minus sign; that is the
convex branch, the one whose curvature 1/rho is positive and whose time
derivative under pure diffusion is negative.  Everything else here is
bookkeeping around that identity.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import erf, erfc

from .errors import ValidationError
from .fields import Domain, LorenzCurve

_SQRT_PI = float(np.sqrt(np.pi))
_SQRT_TWO_PI = float(np.sqrt(2.0 * np.pi))

#: switch from the erf-form to the erfc-form Newton refinement
_TAIL_SPLIT = 0.9375

# Rational initial approximation to the upper-tail normal quantile
# (Abramowitz & Stegun 26.2.23, |error| < 4.5e-4; two Newton steps
# against scipy's erf/erfc take it below 1e-9 everywhere).
_C0, _C1, _C2 = 2.515517, 0.802853, 0.010328
_D1, _D2, _D3 = 1.432788, 0.189269, 0.001308


def _quantile_seed(p: np.ndarray) -> np.ndarray:
    """z with upper-tail probability p, for p in (0, 0.5]."""
    t = np.sqrt(-2.0 * np.log(p))
    num = _C0 + t * (_C1 + t * _C2)
    den = 1.0 + t * (_D1 + t * (_D2 + t * _D3))
    return t - num / den


def erf_inv(y):
    """Inverse of erf on (-1, 1), elementwise; absolute accuracy ~1e-11.

    A rational seed is polished by exactly two Newton steps.  Central
    arguments iterate on erf(x) - y; beyond |y| = 0.9375 the iteration
    switches to erfc(x) - (1 - |y|), where 1 - |y| is exact in floating
    point and the quantile seed takes the complementary probability
    directly, so tail accuracy does not degrade.
    """
    arr = np.asarray(y, dtype=float)
    if np.any(~np.isfinite(arr)) or np.any(np.abs(arr) >= 1.0):
        raise ValidationError("erf_inv domain is the open interval (-1, 1)")
    a = np.abs(arr)
    central = a <= _TAIL_SPLIT
    c = 1.0 - a  # exact for a >= 0.5, which covers the whole tail branch
    p = np.maximum(0.5 * c, 1e-300)  # upper-tail probability of the target
    x = _quantile_seed(p) / np.sqrt(2.0)
    for _ in range(2):
        ex = np.exp(x * x)
        step_central = (erf(x) - a) * 0.5 * _SQRT_PI * ex
        step_tail = (c - erfc(x)) * 0.5 * _SQRT_PI * ex
        x = x - np.where(central, step_central, step_tail)
    x = np.where(a == 0.0, 0.0, x)
    out = np.copysign(x, arr)
    return out if arr.ndim else float(out)


def gaussian_lorenz(f, mean: float, std: float):
    """Lorenz curve of a Gaussian, elementwise in f.

    Endpoints are exact limits: 0 at f = 0 and ``mean`` at f = 1.  A zero
    std gives the straight line mean * f (the point-mass limit).
    """
    if std < 0:
        raise ValidationError("std must be nonnegative")
    farr = np.asarray(f, dtype=float)
    if np.any(farr < 0.0) or np.any(farr > 1.0):
        raise ValidationError("f must lie in [0, 1]")
    flat = np.atleast_1d(farr)
    out = mean * flat
    if std > 0:
        interior = (flat > 0.0) & (flat < 1.0)
        u = erf_inv(2.0 * flat[interior] - 1.0)
        out[interior] -= std * (np.exp(-u * u) / _SQRT_TWO_PI)
    return float(out[0]) if farr.ndim == 0 else out


def heat_lorenz(f, t: float, diffusion: float = 1.0, initial_mean: float = 0.0):
    """Lorenz curve of free diffusion started from a point mass.

    The mean stays at ``initial_mean``; the std grows as sqrt(2 D t), so
    the dip below the initial line at f = 1/2 has depth sqrt(D t / pi).
    """
    if t < 0:
        raise ValidationError("t must be nonnegative")
    if diffusion <= 0:
        raise ValidationError("diffusion must be positive")
    return gaussian_lorenz(f, initial_mean, np.sqrt(2.0 * diffusion * t))


@dataclass(frozen=True)
class OUParams:
    """Linear-restoring-drift diffusion: relaxation toward a target mean."""

    rate: float
    target: float
    diffusion: float
    initial_mean: float = 0.0

    def __post_init__(self):
        if not self.rate > 0:
            raise ValidationError("rate must be positive")
        if not self.diffusion > 0:
            raise ValidationError("diffusion must be positive")

    def mean(self, t) -> float:
        decay = np.exp(-self.rate * np.asarray(t, dtype=float))
        out = self.target + (self.initial_mean - self.target) * decay
        return float(out) if np.ndim(t) == 0 else out

    def variance(self, t, initial_variance: float = 0.0):
        """Solution of dV/dt = 2 D - 2 rate V."""
        stationary = self.diffusion / self.rate
        decay = np.exp(-2.0 * self.rate * np.asarray(t, dtype=float))
        out = stationary + (initial_variance - stationary) * decay
        return float(out) if np.ndim(t) == 0 else out

    def std(self, t, initial_std: float = 0.0):
        return np.sqrt(self.variance(t, initial_std * initial_std))

    @property
    def stationary_std(self) -> float:
        return float(np.sqrt(self.diffusion / self.rate))


def ou_lorenz(f, t: float, params: OUParams):
    """Lorenz curve under linear restoring drift, from a point mass.

    Mean relaxes exponentially from the initial location to the target;
    variance follows dV/dt = 2D - 2*rate*V from 0, saturating at D/rate.
    """
    if t < 0:
        raise ValidationError("t must be nonnegative")
    return gaussian_lorenz(f, params.mean(t), float(params.std(t)))


# ---------------------------------------------------------------------------
# scaling map between free diffusion and the quadratic potential

def map_time_from_heat_time(t: float) -> float:
    """s = log sqrt(2t + 1); the rescaled clock of the quadratic potential."""
    if t < 0:
        raise ValidationError("t must be nonnegative")
    return 0.5 * float(np.log1p(2.0 * t))


def heat_time_from_map_time(s: float) -> float:
    """Inverse clock map, t = (e^{2s} - 1) / 2."""
    if s < 0:
        raise ValidationError("s must be nonnegative")
    return 0.5 * float(np.expm1(2.0 * s))


def heat_to_quadratic_map(curve: LorenzCurve) -> tuple[LorenzCurve, float]:
    """Rescale a free-diffusion curve into quadratic-potential variables.

    Reads the heat time from ``curve.time`` and returns (e^{-s} * curve,
    s).  The damping factor e^{-s} is what makes the image satisfy
    J_s + J = -1/J_hh and converge, as s grows, to the stationary curve
    -phi(z(h)) instead of diverging with the spreading Gaussian.
    """
    s = map_time_from_heat_time(curve.time)
    scaled = float(np.exp(-s)) * curve.values
    return LorenzCurve(curve.fgrid, scaled, time=s, domain=curve.domain), s
