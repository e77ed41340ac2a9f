"""Build script for the optional compiled kernels.

The package is fully functional without the extension (a pure-Python
fallback is selected at import time), but the compiled kernels are what
make desk-scale builds and the DP oracle fast.
"""

from setuptools import setup
from setuptools.extension import Extension

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize

    ext = Extension(
        "segcoreset._kernels",
        ["src/segcoreset/_kernels.pyx"],
        include_dirs=[numpy.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        # -ffp-contract=off: keep float arithmetic bit-identical to the
        # pure-Python backend (no FMA fusion), which the cross-backend
        # agreement tests rely on.
        extra_compile_args=["-O3", "-ffp-contract=off"],
        optional=True,
    )
    ext_modules = cythonize(
        [ext],
        compiler_directives={
            "language_level": "3",
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
            "initializedcheck": False,
        },
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
