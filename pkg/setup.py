"""Build script for the optional compiled projected-gradient kernel.

The package is fully functional without the extension (a numpy fallback is
selected at import time); building it just makes the batch-mode inner solver
considerably faster.
"""

from setuptools import Extension, setup

try:
    import numpy
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "mibeam._apg_cy",
                ["src/mibeam/_apg_cy.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level=3,
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
