"""Build script: compiles the Cython tick kernel when Cython is available.

The package works without the extension (a pure-Python kernel is selected at
import time), but the compiled kernel is what makes large populations fast.
`-ffp-contract=off` keeps the C arithmetic bit-identical to the Python
fallback (no FMA contraction), which the backend-parity tests rely on.
"""

from setuptools import Extension, find_packages, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

ext_modules = []
if cythonize is not None:
    import numpy

    ext_modules = cythonize(
        [
            Extension(
                "modalsim.kernels._tick_cy",
                ["src/modalsim/kernels/_tick_cy.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3", "-ffp-contract=off"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(
    package_dir={"": "src"},
    packages=find_packages("src"),
    ext_modules=ext_modules,
)
