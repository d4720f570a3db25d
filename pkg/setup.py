"""Build script for the compiled simplex kernel.

The extension is optional: if Cython or a C compiler is unavailable the
package installs anyway and falls back to the pure-NumPy kernel at import.
"""

from setuptools import Extension, setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize

    ext = Extension(
        "ksubmax._kernels._simplex_cy",
        ["src/ksubmax/_kernels/_simplex_cy.pyx"],
        include_dirs=[numpy.get_include()],
        extra_compile_args=["-O3"],
        optional=True,
    )
    ext_modules = cythonize([ext], language_level=3)
except ImportError:
    pass

setup(ext_modules=ext_modules)
