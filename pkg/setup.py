import numpy
from setuptools import setup
from setuptools.extension import Extension

try:
    from Cython.Build import cythonize
except ImportError:
    # Pure-Python install; the package falls back to numpy kernels at import.
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "lorenzlab._kernels._native",
                ["src/lorenzlab/_kernels/_native.pyx"],
                include_dirs=[numpy.get_include()],
                # -ffp-contract=off: kernels must match the numpy fallback
                # bitwise, so no fused multiply-adds
                extra_compile_args=["-O3", "-ffp-contract=off"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level=3,
    )

setup(ext_modules=ext_modules)
