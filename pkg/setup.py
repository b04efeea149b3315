import os

import numpy as np
from setuptools import Extension, setup

ext_modules = []
if not os.environ.get("CUBEROOT_NO_EXT"):
    try:
        from Cython.Build import cythonize
    except ImportError:
        # no Cython: the package falls back to the numpy kernels at import
        pass
    else:
        ext_modules = cythonize(
            [
                Extension(
                    "cuberoot._kernels",
                    ["src/cuberoot/_kernels.pyx"],
                    include_dirs=[np.get_include()],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                    extra_compile_args=["-O3"],
                )
            ],
            language_level=3,
        )

setup(ext_modules=ext_modules)
