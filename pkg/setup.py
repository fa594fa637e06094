"""Build script: compiles the Cython stepping kernel when a toolchain is
available, and falls back to the pure-numpy lane otherwise.

The package works either way; ``kinfront.sim.kernels.BACKEND`` reports which
lane was selected at import time.
"""

import sys

from setuptools import setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [
            Extension(
                "kinfront.sim._kernels",
                ["src/kinfront/sim/_kernels.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": 3},
    )
except Exception as exc:  # pragma: no cover - exercised only on toolchain-less hosts
    sys.stderr.write(
        "kinfront: Cython extension not built (%s); using the pure-numpy kernels\n" % exc
    )
    ext_modules = []

setup(ext_modules=ext_modules)
