import os

from setuptools import setup

ext_modules = []
if os.environ.get("POPPROTO_NO_EXT") != "1":
    try:
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [
                Extension(
                    "popproto.kernels._speedups",
                    ["src/popproto/kernels/_speedups.pyx"],
                )
            ],
            language_level=3,
        )
    except ImportError:
        # No Cython available: install with the pure-Python kernels only.
        ext_modules = []

setup(ext_modules=ext_modules)
