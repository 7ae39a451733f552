"""Build hook for the optional compiled core.

The package is fully functional without the extension (a numpy fallback is
selected at import time); set RETRACE_SKIP_EXT=1 to skip compilation.
"""

import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("RETRACE_SKIP_EXT") != "1":
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "retrace._core._native",
                    ["src/retrace/_core/_native.pyx"],
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
