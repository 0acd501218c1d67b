import os

import numpy as np
from setuptools import Extension, setup

ext_modules = []
if os.environ.get("GAUGE_OPTICS_NO_EXT") != "1":
    try:
        from Cython.Build import cythonize
    except ImportError:  # pure-Python install; kernels fall back to numpy
        cythonize = None
    if cythonize is not None:
        ext_modules = cythonize(
            [
                Extension(
                    "gauge_optics._kernels",
                    ["src/gauge_optics/_kernels.pyx"],
                    include_dirs=[np.get_include()],
                    extra_compile_args=["-O3", "-fcx-limited-range"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
