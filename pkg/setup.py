"""Optional Cython build of the hot kernels.

The package works without the compiled module: ``mtmf.kernels`` falls back
to the pure-Python implementation when ``mtmf._ckernels`` is missing.
"""
import os

from setuptools import setup

ext_modules = []
if not os.environ.get("MTMF_NO_EXT"):
    try:
        import numpy as np
        from Cython.Build import cythonize
        from setuptools import Extension
    except ImportError:
        pass
    else:
        ext_modules = cythonize(
            [
                Extension(
                    "mtmf._ckernels",
                    ["src/mtmf/_ckernels.pyx"],
                    include_dirs=[np.get_include()],
                    extra_compile_args=["-O3", "-ffp-contract=off"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
