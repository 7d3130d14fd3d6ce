"""Build script: compiles the optional Cython enumeration kernel.

The package works without the extension (a pure-Python kernel is selected at
import time), so a missing Cython toolchain only costs speed.
"""

from setuptools import setup

try:
    from Cython.Build import cythonize
    from setuptools.extension import Extension

    ext_modules = cythonize(
        [Extension("subsetsql._kernel", ["src/subsetsql/_kernel.pyx"])],
        language_level=3,
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
