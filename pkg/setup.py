"""Build script for the optional compiled backprojection kernels.

The package works without the extension: roisar.kernels falls back to a
vectorized numpy implementation when the compiled module is missing.
"""

from setuptools import Extension, setup

try:
    import numpy as np
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "roisar.kernels._accel",
                ["src/roisar/kernels/_accel.pyx"],
                include_dirs=[np.get_include()],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    import warnings

    warnings.warn("Cython or numpy unavailable, building without compiled kernels")
    ext_modules = []

setup(ext_modules=ext_modules)
