"""Build script: compiles the optional Cython distance kernels.

The package works without the extension (a NumPy fallback is selected at
import time), so a failed build only costs speed.  Set RANDCLT_NO_EXT=1 to
skip the extension entirely.
"""

import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("RANDCLT_NO_EXT", "") != "1":
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "randclt._kernels._ckernels",
                    ["src/randclt/_kernels/_ckernels.pyx"],
                    extra_compile_args=["-O3"],
                )
            ],
            language_level="3",
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
