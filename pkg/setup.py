"""Build script for the optional compiled kernels.

The package is pure Python plus one Cython extension. If Cython is not
available the extension is skipped and the numpy fallback backend is used
at runtime, so installation never hard-fails on a missing compiler.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

extensions = [
    Extension(
        "chaingreedy.backends._kernels",
        ["src/chaingreedy/backends/_kernels.pyx"],
        extra_compile_args=["-O3"],
    )
]

setup(
    ext_modules=(
        cythonize(extensions, compiler_directives={"language_level": "3"})
        if cythonize is not None
        else []
    ),
)
