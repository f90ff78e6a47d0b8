# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled implementations of the hot kernels.

Each function mirrors the numpy fallback operation for operation: same
expression grouping, same accumulation direction, no fused multiply-adds
(see the -ffp-contract=off build flag), so trajectories are bitwise
identical across backends.  Any change here must be mirrored in
_numpy.py and covered by the backend-parity tests.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport INFINITY

BACKEND = "c"


def yardsale_density_profile(const double[::1] x, const double[::1] rho,
                             double gamma, out=None):
    cdef Py_ssize_t n = x.shape[0]
    if out is None:
        out = np.empty(n)
    cdef double[::1] o = out
    cdef Py_ssize_t i
    cdef double acc, dxi, gi, gim, half_gamma
    cdef double[::1] p2 = np.empty(n)
    cdef double[::1] s0 = np.empty(n)
    with nogil:
        # forward prefix of y^2 rho
        acc = 0.0
        p2[0] = 0.0
        for i in range(1, n):
            dxi = x[i] - x[i - 1]
            gi = (x[i] * x[i]) * rho[i]
            gim = (x[i - 1] * x[i - 1]) * rho[i - 1]
            acc = acc + 0.5 * (gi + gim) * dxi
            p2[i] = acc
        # backward suffix of rho
        acc = 0.0
        s0[n - 1] = 0.0
        for i in range(n - 2, -1, -1):
            dxi = x[i + 1] - x[i]
            acc = acc + 0.5 * (rho[i + 1] + rho[i]) * dxi
            s0[i] = acc
        half_gamma = 0.5 * gamma
        for i in range(n):
            o[i] = ((x[i] * x[i]) * s0[i] + p2[i]) * half_gamma
    return out


def yardsale_lorenz_profile(const double[::1] slopes, double df, double gamma,
                            out=None):
    cdef Py_ssize_t n = slopes.shape[0]
    if out is None:
        out = np.empty(n)
    cdef double[::1] o = out
    cdef Py_ssize_t i
    cdef double acc, s2i, s2im, omf, half_gamma
    cdef double[::1] t = np.empty(n)
    with nogil:
        acc = 0.0
        t[0] = 0.0
        for i in range(1, n):
            s2i = slopes[i] * slopes[i]
            s2im = slopes[i - 1] * slopes[i - 1]
            acc = acc + 0.5 * (s2i + s2im) * df
            t[i] = acc
        half_gamma = 0.5 * gamma
        for i in range(n):
            if i == n - 1:
                omf = 0.0
            else:
                omf = 1.0 - i * df
            o[i] = ((slopes[i] * slopes[i]) * omf + t[i]) * half_gamma
    return out


def fpe_step(const double[::1] rho, drift, const double[::1] dcoef,
             double dt, double dx, out=None):
    cdef Py_ssize_t n = rho.shape[0]
    if out is None:
        out = np.empty(n)
    cdef double[::1] o = out
    cdef const double[::1] adrift
    cdef bint has_drift = drift is not None
    if has_drift:
        adrift = drift
    cdef Py_ssize_t i
    cdef double dx2 = dx * dx
    cdef double two_dx = 2.0 * dx
    cdef double bm, bc, bp, am, ap, upd
    with nogil:
        for i in range(1, n - 1):
            bm = dcoef[i - 1] * rho[i - 1]
            bc = dcoef[i] * rho[i]
            bp = dcoef[i + 1] * rho[i + 1]
            upd = (bp - 2.0 * bc + bm) / dx2
            if has_drift:
                am = adrift[i - 1] * rho[i - 1]
                ap = adrift[i + 1] * rho[i + 1]
                upd = upd - (ap - am) / two_dx
            o[i] = rho[i] + dt * upd
        o[0] = 0.0
        o[n - 1] = 0.0
    return out


def lorenz_step(const double[::1] values, const double[::1] dpro, drift,
                double df, double dt_max, double cfl, double eps_ff,
                out=None):
    cdef Py_ssize_t n = values.shape[0]
    if n < 5:
        raise ValueError("lorenz_step needs at least 5 nodes")
    if out is None:
        out = np.empty(n)
    cdef double[::1] o = out
    cdef const double[::1] adrift
    cdef bint has_drift = drift is not None
    if has_drift:
        adrift = drift
    cdef Py_ssize_t i, floored = 0
    cdef double df2 = df * df
    cdef double lff, lmin = INFINITY, dmax = -INFINITY
    cdef double dt, upd, sec, min_sec
    cdef double floor_frac
    with nogil:
        for i in range(1, n - 1):
            lff = (values[i + 1] - 2.0 * values[i] + values[i - 1]) / df2
            if lff < eps_ff:
                floored += 1
                lff = eps_ff
            if lff < lmin:
                lmin = lff
            if dpro[i] > dmax:
                dmax = dpro[i]
        floor_frac = <double>floored / <double>(n - 2)
        if dmax > 0.0:
            dt = cfl * df * df * lmin * lmin / dmax
            if dt > dt_max:
                dt = dt_max
        else:
            dt = dt_max
        for i in range(1, n - 1):
            lff = (values[i + 1] - 2.0 * values[i] + values[i - 1]) / df2
            if lff < eps_ff:
                lff = eps_ff
            upd = -dpro[i] / lff
            if has_drift:
                upd = upd + adrift[i]
            o[i] = values[i] + dt * upd
        o[0] = values[0]
        o[n - 1] = values[n - 1]
        min_sec = INFINITY
        for i in range(1, n - 1):
            sec = o[i + 1] - 2.0 * o[i] + o[i - 1]
            if sec < min_sec:
                min_sec = sec
    return out, dt, floor_frac, min_sec


def transaction_sweep(double[::1] w, const cnp.int64_t[::1] ii,
                      const cnp.int64_t[::1] jj, const double[::1] eta,
                      double sqrt_gamma):
    cdef Py_ssize_t t, i, j
    cdef Py_ssize_t m = ii.shape[0]
    cdef double a, b, mn, d, na, nb, total
    with nogil:
        for t in range(m):
            i = ii[t]
            j = jj[t]
            a = w[i]
            b = w[j]
            mn = a if a < b else b
            d = sqrt_gamma * mn * eta[t]
            total = a + b
            na = a + d
            nb = total - na
            if na < 0.5 * total:
                # Sterbenz complement of the larger side is exact
                na = total - nb
            w[i] = na
            w[j] = nb
