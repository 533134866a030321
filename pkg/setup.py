import os

from setuptools import Extension, setup

# The compiled kernels are an accelerator, not a requirement: losdof.backend
# falls back to the numpy implementations when the extension is missing.
# Set LOSDOF_SKIP_EXT=1 to build a pure-Python wheel.
ext_modules = []
if os.environ.get("LOSDOF_SKIP_EXT") != "1":
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [Extension("losdof._kernels_cy", ["src/losdof/_kernels_cy.pyx"])],
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
