"""Build script: compiles the Cython kernel module when possible.

If Cython or a C compiler is unavailable the package still installs and
``plspin.kernels`` falls back to the pure-Python implementation.
"""
import os

from setuptools import setup

ext_modules = []
if os.environ.get("PLSPIN_NO_EXT") != "1":
    try:
        import numpy as np
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [
                Extension(
                    "plspin._kernels",
                    ["src/plspin/_kernels.pyx"],
                    include_dirs=[np.get_include()],
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )
    except Exception as exc:  # pragma: no cover - build environment dependent
        print(f"plspin: skipping compiled kernels ({exc})")
        ext_modules = []

setup(ext_modules=ext_modules)
