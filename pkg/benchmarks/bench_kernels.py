"""Time the compiled kernels against the numpy fallback.

Usage: python benchmarks/bench_kernels.py [--nodes N] [--sweeps K]

Both backends compute bitwise-identical results (asserted here); the
question is only speed.  The sweep kernel dominates agent runs, the
curve stepper dominates Lorenz-side PDE runs.
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from lorenzlab._kernels import _numpy as py_backend

try:
    from lorenzlab._kernels import _native as c_backend
except ImportError:
    c_backend = None


def time_call(fn, *args, repeat: int = 5, inner: int = 20) -> float:
    best = float("inf")
    for _ in range(repeat):
        start = time.perf_counter()
        for _ in range(inner):
            fn(*args)
        best = min(best, (time.perf_counter() - start) / inner)
    return best


def bench_case(name, py_fn, c_fn, args_factory, check=None):
    args_py = args_factory()
    t_py = time_call(py_fn, *args_py)
    if c_fn is None:
        print(f"{name:>22}: numpy {t_py * 1e6:9.1f} us   (no compiled backend)")
        return
    args_c = args_factory()
    t_c = time_call(c_fn, *args_c)
    if check is not None:
        check(args_py, args_c)
    print(f"{name:>22}: numpy {t_py * 1e6:9.1f} us   compiled "
          f"{t_c * 1e6:9.1f} us   speedup {t_py / t_c:6.1f}x")


def main() -> None:
    parser = argparse.ArgumentParser()
    parser.add_argument("--nodes", type=int, default=1025)
    parser.add_argument("--sweeps", type=int, default=100_000)
    args = parser.parse_args()

    n = args.nodes
    rng = np.random.default_rng(12345)

    x = np.linspace(0.0, 8.0, n)
    rho = np.exp(-0.5 * (x - 1.0) ** 2 / 0.04)
    rho /= np.trapezoid(rho, x)

    f = np.linspace(0.0, 1.0, n)
    curve = f**2 * 0.7 + f * 0.3
    slopes = np.gradient(curve, f)
    dpro = np.full(n, 0.25)
    drift = None

    wealth0 = rng.gamma(4.0, 0.25, size=1000)
    ii = rng.integers(0, 1000, args.sweeps)
    jj = rng.integers(0, 999, args.sweeps)
    jj = jj + (jj >= ii)
    eta = rng.integers(0, 2, args.sweeps) * 2.0 - 1.0

    def parity(pair_py, pair_c):
        out_py, out_c = pair_py[-1], pair_c[-1]
        if not np.array_equal(out_py, out_c):
            raise AssertionError("backend outputs differ bitwise")

    c = c_backend
    bench_case("yardsale_density", py_backend.yardsale_density_profile,
               c and c.yardsale_density_profile,
               lambda: (x, rho, 0.1, np.empty(n)), parity)
    bench_case("yardsale_lorenz", py_backend.yardsale_lorenz_profile,
               c and c.yardsale_lorenz_profile,
               lambda: (slopes.copy(), 1.0 / (n - 1), 0.1, np.empty(n)),
               parity)
    bench_case("fpe_step", py_backend.fpe_step,
               c and c.fpe_step,
               lambda: (rho.copy(), drift, np.full(n, 0.3), 1e-7,
                        x[1] - x[0], np.empty(n)), parity)
    bench_case("lorenz_step", py_backend.lorenz_step,
               c and c.lorenz_step,
               lambda: (curve.copy(), dpro, drift, 1.0 / (n - 1), 1e-6,
                        0.4, 1e-9, np.empty(n)))
    bench_case("transaction_sweep", py_backend.transaction_sweep,
               c and c.transaction_sweep,
               lambda: (wealth0.copy(), ii, jj, eta, 0.05**0.5),
               lambda a, b: parity((a[0],), (b[0],)))


if __name__ == "__main__":
    main()
