"""Build hook for the optional compiled polynomial kernels."""

from setuptools import setup

try:
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [Extension("hypersos._kernels", ["src/hypersos/_kernels.pyx"])],
        compiler_directives={"language_level": "3"},
    )
except ImportError:  # no Cython: the pure-Python kernels are used
    ext_modules = []

setup(ext_modules=ext_modules)
