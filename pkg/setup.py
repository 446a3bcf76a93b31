"""Builds the optional compiled closure kernels; the package works without them."""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # numpy fallback in qsec._kernels_py is used instead
    ext_modules = []
else:
    ext_modules = cythonize(
        [Extension("qsec._kernels", ["src/qsec/_kernels.pyx"], extra_compile_args=["-O3"])],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
