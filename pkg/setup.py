"""Build script: compiles the optional C kernel extension.

The extension accelerates the LSTM gate math, softmax, and Levenshtein
inner loops. If Cython or a C compiler is unavailable the package still
installs and falls back to the pure numpy kernels at import time.

Set ROBOCMD_NO_EXT=1 to skip the extension entirely.
"""

import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("ROBOCMD_NO_EXT") != "1":
    try:
        import numpy as np
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "robocmd.kernels._ckern",
                    sources=["src/robocmd/kernels/_ckern.pyx"],
                    include_dirs=[np.get_include()],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={
                "language_level": 3,
                "boundscheck": False,
                "wraparound": False,
                "initializedcheck": False,
                "cdivision": True,
            },
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
