"""Build script for the compiled integrator core.

The extension is optional at runtime: if it fails to build or import, the
package falls back to the pure-Python kernels (see hofsim.backend).
"""

import numpy
from setuptools import Extension, setup
from Cython.Build import cythonize

extensions = [
    Extension(
        "hofsim._kernels_cy",
        ["src/hofsim/_kernels_cy.pyx"],
        include_dirs=[numpy.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        extra_compile_args=["-O3"],
    )
]

setup(ext_modules=cythonize(extensions, language_level=3))
