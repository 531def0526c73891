"""Build script for the optional compiled scoring kernels.

The package works without the extension (a pure-Python twin is selected at
import time); building it just makes the reference backend and fragment
matcher much faster.  If Cython or a C compiler is missing the install
falls back to pure Python instead of failing.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    # -ffp-contract=off: forbid fused multiply-add so the compiled kernel
    # stays bit-identical to the pure-Python twin.
    ext_modules = cythonize(
        [
            Extension(
                "shannoneval._kernels._kernel_cy",
                ["src/shannoneval/_kernels/_kernel_cy.pyx"],
                extra_compile_args=["-O2", "-ffp-contract=off"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
