"""Build the optional compiled simplex kernel.

The package works without it: backdoor_mip.lp falls back to the pure
NumPy kernel when the extension is missing or fails to build.
"""

import numpy
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "backdoor_mip.lp._simplex_core",
                ["src/backdoor_mip/lp/_simplex_core.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3", "boundscheck": False, "wraparound": False},
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
