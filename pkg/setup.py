import os

import numpy
from Cython.Build import cythonize
from setuptools import Extension, setup

# The Gibbs kernel draws from numpy's C distribution functions, which live in
# a static library shipped inside numpy.random.
numpy_random_lib = os.path.join(os.path.dirname(numpy.random.__file__), "lib")

extensions = [
    Extension(
        "mixedgm._chain",
        ["src/mixedgm/_chain.pyx"],
        include_dirs=[numpy.get_include()],
        library_dirs=[numpy_random_lib],
        libraries=["npyrandom"],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        # -ffp-contract=off: no fused multiply-adds, so the compiled sweep is
        # bit-identical to the pure-Python fallback
        extra_compile_args=["-O3", "-ffp-contract=off"],
    )
]

setup(ext_modules=cythonize(extensions, language_level=3))
