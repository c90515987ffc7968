import os
import sys

import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # pure-Python install; kernels fall back at import
    cythonize = None

openmp = [] if sys.platform == "darwin" else ["-fopenmp"]

ext_modules = []
if cythonize is not None and not os.environ.get("NETPSCORE_NO_EXT"):
    ext_modules = cythonize(
        [
            Extension(
                "netpscore._kernels",
                ["src/netpscore/_kernels.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3"] + openmp,
                extra_link_args=openmp,
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
