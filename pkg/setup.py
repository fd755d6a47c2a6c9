import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "hilbert2._kernel",
                ["src/hilbert2/_kernel.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    # the package runs on the numpy fallback kernel without Cython
    ext_modules = []

setup(ext_modules=ext_modules)
