"""Build the optional compiled kernels.

The Cython extension is optional: when it cannot be compiled the package
falls back to the numpy implementation in ``twistedhom._kernels_py``.
"""
import os
import sys

from setuptools import setup

ext_modules = []
if os.environ.get("TWISTEDHOM_NO_EXT") != "1":
    try:
        import numpy as np
        from Cython.Build import cythonize
        from setuptools import Extension

        openmp = [] if sys.platform == "darwin" else ["-fopenmp"]
        ext_modules = cythonize(
            [
                Extension(
                    "twistedhom._ckernels",
                    ["src/twistedhom/_ckernels.pyx"],
                    include_dirs=[np.get_include()],
                    extra_compile_args=["-O3"] + openmp,
                    extra_link_args=openmp,
                )
            ],
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
