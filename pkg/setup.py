import os

import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # pure-Python install; corramp.kernels falls back at import
    cythonize = None

compile_args = ["-O3"]
if not os.environ.get("CORRAMP_PORTABLE"):
    compile_args.append("-march=native")

ext_modules = []
if cythonize is not None:
    ext_modules = cythonize(
        [
            Extension(
                "corramp._ckernels",
                ["src/corramp/_ckernels.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=compile_args,
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
