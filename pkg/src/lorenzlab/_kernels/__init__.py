"""Hot-kernel backend selection.

The compiled extension (``_native``, Cython) is preferred; the numpy module
is the fallback.  Both expose the same five functions with identical
semantics and accumulation order.  Selection happens once at import, may be
forced with ``LORENZLAB_KERNELS=c`` or ``LORENZLAB_KERNELS=py``, and is
reported by ``active_backend()``.
"""
from __future__ import annotations

import os

from . import _numpy

_requested = os.environ.get("LORENZLAB_KERNELS", "auto").lower()

if _requested not in ("auto", "c", "py"):
    raise RuntimeError(
        f"LORENZLAB_KERNELS must be 'auto', 'c' or 'py', got {_requested!r}"
    )

_impl = None
if _requested in ("auto", "c"):
    try:
        from . import _native as _impl  # type: ignore[no-redef]
    except ImportError:
        if _requested == "c":
            raise RuntimeError(
                "LORENZLAB_KERNELS=c but the compiled kernel module is not built"
            ) from None
if _impl is None:
    _impl = _numpy

yardsale_density_profile = _impl.yardsale_density_profile
yardsale_lorenz_profile = _impl.yardsale_lorenz_profile
fpe_step = _impl.fpe_step
lorenz_step = _impl.lorenz_step
transaction_sweep = _impl.transaction_sweep


def active_backend() -> str:
    """Name of the kernel backend actually in use ('c' or 'numpy')."""
    return _impl.BACKEND
