"""Numpy fallback implementations of the hot kernels.

These mirror the compiled versions operation for operation (same accumulation
order, same update expressions) so that a run produces identical trajectories
regardless of backend.  The transaction sweep degrades to a Python loop; it is
the price of not having the compiled module.
"""
from __future__ import annotations

import numpy as np

BACKEND = "numpy"


def yardsale_density_profile(x: np.ndarray, rho: np.ndarray, gamma: float,
                             out: np.ndarray | None = None) -> np.ndarray:
    """Nonlocal yard-sale diffusion coefficient at every grid node.

    D(w) = (gamma/2) * [ int_0^w y^2 rho(y) dy + w^2 * int_w^inf rho(y) dy ]
    via one forward and one backward prefix trapezoid (the integrand's kink
    sits on the node, so the split is exact for composite trapezoid).
    """
    n = x.size
    if out is None:
        out = np.empty(n)
    dx = np.diff(x)
    g = x * x * rho
    # forward prefix of y^2 rho
    p2 = np.empty(n)
    p2[0] = 0.0
    np.cumsum(0.5 * (g[1:] + g[:-1]) * dx, out=p2[1:])
    # backward suffix of rho
    s0 = np.empty(n)
    s0[-1] = 0.0
    np.cumsum((0.5 * (rho[1:] + rho[:-1]) * dx)[::-1], out=s0[:-1][::-1])
    np.multiply(x * x, s0, out=out)
    out += p2
    out *= 0.5 * gamma
    return out


def yardsale_lorenz_profile(slopes: np.ndarray, df: float, gamma: float,
                            out: np.ndarray | None = None) -> np.ndarray:
    """Transformed yard-sale diffusion on the Lorenz side.

    With nondecreasing slopes s(g), min(s(g), s(f)) splits at g = f:
    Dt(f) = (gamma/2) * [ int_0^f s(g)^2 dg + s(f)^2 * (1 - f) ].
    """
    n = slopes.size
    if out is None:
        out = np.empty(n)
    s2 = slopes * slopes
    t = np.empty(n)
    t[0] = 0.0
    np.cumsum(0.5 * (s2[1:] + s2[:-1]) * df, out=t[1:])
    one_minus_f = 1.0 - np.arange(n) * df
    one_minus_f[-1] = 0.0
    np.multiply(s2, one_minus_f, out=out)
    out += t
    out *= 0.5 * gamma
    return out


def fpe_step(rho: np.ndarray, drift: np.ndarray | None, dcoef: np.ndarray,
             dt: float, dx: float, out: np.ndarray | None = None) -> np.ndarray:
    """One explicit flux-form step of rho_t = -(drift rho)_x + (dcoef rho)_xx.

    Central differences of the nodewise products; boundary nodes held at 0.
    """
    if out is None:
        out = np.empty_like(rho)
    b = dcoef * rho
    upd = (b[2:] - 2.0 * b[1:-1] + b[:-2]) / (dx * dx)
    if drift is not None:
        a = drift * rho
        upd = upd - (a[2:] - a[:-2]) / (2.0 * dx)
    out[1:-1] = rho[1:-1] + dt * upd
    out[0] = 0.0
    out[-1] = 0.0
    return out


def lorenz_step(values: np.ndarray, dpro: np.ndarray, drift: np.ndarray | None,
                df: float, dt_max: float, cfl: float, eps_ff: float,
                out: np.ndarray | None = None):
    """One explicit step of L_t = -Dt/L_ff + drift with adaptive dt.

    Curvature uses central second differences at every interior node; the
    stencils reach the prescribed boundary values but never difference
    across them (no ghost nodes).  Returns
    (out, dt_used, floor_fraction, min_second_difference_after).
    """
    n = values.size
    if n < 5:
        raise ValueError("lorenz_step needs at least 5 nodes")
    if out is None:
        out = np.empty_like(values)
    v = values
    sec = v[2:] - 2.0 * v[1:-1] + v[:-2]
    lff = sec / (df * df)
    floor_frac = float(np.count_nonzero(lff < eps_ff)) / lff.size
    np.maximum(lff, eps_ff, out=lff)
    dmax = float(np.max(dpro[1:-1]))
    lmin = float(np.min(lff))
    if dmax > 0.0:
        dt = cfl * df * df * lmin * lmin / dmax
        if dt > dt_max:
            dt = dt_max
    else:
        dt = dt_max
    upd = -dpro[1:-1] / lff
    if drift is not None:
        upd += drift[1:-1]
    out[1:-1] = v[1:-1] + dt * upd
    out[0] = v[0]
    out[-1] = v[-1]
    min_sec = float(np.min(out[2:] - 2.0 * out[1:-1] + out[:-2]))
    return out, dt, floor_frac, min_sec


def transaction_sweep(w: np.ndarray, ii: np.ndarray, jj: np.ndarray,
                      eta: np.ndarray, sqrt_gamma: float) -> None:
    """Run a batch of pairwise exchanges in place.

    The loser's new wealth is derived from the pair total so the total is
    reproduced exactly in floating point (see agents.transact).
    """
    wl = w.tolist()
    il = ii.tolist()
    jl = jj.tolist()
    el = eta.tolist()
    for t in range(len(il)):
        i = il[t]
        j = jl[t]
        a = wl[i]
        b = wl[j]
        m = a if a < b else b
        d = sqrt_gamma * m * el[t]
        total = a + b
        na = a + d
        nb = total - na
        if na < 0.5 * total:
            # Sterbenz complement of the larger side is exact
            na = total - nb
        wl[i] = na
        wl[j] = nb
    w[:] = wl
