import numpy
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "magcool._kernel",
                ["src/magcool/_kernel.pyx"],
                include_dirs=[numpy.get_include()],
            )
        ],
        language_level=3,
    )
except ImportError:
    # pure-Python fallback engine is selected at import time
    ext_modules = []

setup(ext_modules=ext_modules)
