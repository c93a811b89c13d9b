import numpy as np
from setuptools import setup, Extension

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "relaxls._core._speedups",
                ["src/relaxls/_core/_speedups.pyx"],
                include_dirs=[np.get_include()],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    # Pure-python fallback is selected at import time, so a missing
    # Cython toolchain only costs speed, not functionality.
    ext_modules = []

setup(ext_modules=ext_modules, zip_safe=False)
