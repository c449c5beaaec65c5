"""Build the optional compiled kernels; the package works without them."""

import os
import sys

from setuptools import setup

ext_modules = []
if os.environ.get("CAVITYED_NO_EXT") != "1":
    try:
        import numpy as np
        from Cython.Build import cythonize
        from setuptools import Extension

        openmp = [] if sys.platform == "darwin" else ["-fopenmp"]
        ext_modules = cythonize(
            [
                Extension(
                    "cavityed.linop._kernels",
                    ["src/cavityed/linop/_kernels.pyx"],
                    include_dirs=[np.get_include()],
                    extra_compile_args=["-O3"] + openmp,
                    extra_link_args=openmp,
                )
            ],
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        print("Cython/numpy not available; installing pure-Python kernels only", file=sys.stderr)

setup(ext_modules=ext_modules)
