import os

import numpy as np
from setuptools import Extension, setup

# The compiled core is optional: shapebg falls back to numpy kernels when it is missing.
ext_modules = []
if os.environ.get("SHAPEBG_NO_EXT") != "1":
    try:
        from Cython.Build import cythonize
    except ImportError:
        cythonize = None
    if cythonize is not None:
        ext_modules = cythonize(
            [
                Extension(
                    "shapebg._core",
                    sources=["src/shapebg/_core.pyx"],
                    include_dirs=[np.get_include()],
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={
                "language_level": 3,
                "boundscheck": False,
                "wraparound": False,
                "cdivision": True,
                "initializedcheck": False,
            },
        )

setup(ext_modules=ext_modules)
