"""Build script for the optional compiled kernels.

The package is pure Python except for ``sibmatch._kernels._speedups``,
which accelerates the permutation routines used by the market generator.
If Cython or a C compiler is unavailable the extension is skipped and the
pure-Python fallback in ``sibmatch._kernels._pyimpl`` is used instead.
"""

from setuptools import Extension, setup

ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "sibmatch._kernels._speedups",
                ["src/sibmatch/_kernels/_speedups.pyx"],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
        quiet=True,
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
