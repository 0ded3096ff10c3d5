"""Build script for the compiled kernel extension.

The package works without the extension (a NumPy fallback is selected at
import time), so a failed compile should not block installation: we try to
cythonize and fall back to a pure-Python build if the toolchain is missing.
"""

from setuptools import Extension, setup

ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "bisslb._kernels._native",
                sources=["src/bisslb/_kernels/_native.pyx"],
            )
        ],
        language_level="3",
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
