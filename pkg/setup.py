# Builds the optional compiled kernels; the package works without them.
import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("ENGEL_GMT_NO_EXT") != "1":
    try:
        import numpy as np
        from Cython.Build import cythonize

        ext = Extension(
            "engel_gmt._kernels",
            ["src/engel_gmt/_kernels.pyx"],
            include_dirs=[np.get_include()],
            extra_compile_args=["-O2", "-ffp-contract=off"],
            define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        )
        ext_modules = cythonize([ext], language_level=3)
    except ImportError:
        print("Cython or numpy missing: installing without compiled kernels")

setup(ext_modules=ext_modules)
