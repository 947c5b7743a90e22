import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("PERMEX_SKIP_EXT") != "1":
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "permex._ckernels",
                    ["src/permex/_ckernels.pyx"],
                    extra_compile_args=["-O3"],
                    optional=True,
                )
            ],
            language_level=3,
        )
    except ImportError:
        # No Cython: install runs with the pure-Python kernels only.
        ext_modules = []

setup(ext_modules=ext_modules)
