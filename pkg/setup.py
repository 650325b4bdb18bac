"""Build script: compiles the optional Cython kernel extension when Cython is
available, otherwise installs the pure-Python package (the numpy fallback
backend is selected automatically at import).

Build the compiled core in place with:

    python setup.py build_ext --inplace
"""
from setuptools import setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [
            Extension(
                "gradmcmc._kernels",
                ["src/gradmcmc/_kernels.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
