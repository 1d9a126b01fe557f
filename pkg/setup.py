"""Build script for the optional compiled voting kernel.

The package is pure Python except for the accumulator rasterizer in
``autocalib._kernels``.  If Cython or a C compiler is unavailable the
extension is skipped and the numpy fallback is selected at import time.
"""

from setuptools import Extension, setup

try:
    import numpy as np
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "autocalib._kernels._voting",
                ["src/autocalib/_kernels/_voting.pyx"],
                include_dirs=[np.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                extra_compile_args=["-O3"],
            )
        ],
        language_level=3,
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
