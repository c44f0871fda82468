import numpy
from setuptools import Extension, setup
from Cython.Build import cythonize

setup(
    ext_modules=cythonize(
        [
            Extension(
                "platoonrisk._kernels._core",
                ["src/platoonrisk/_kernels/_core.pyx"],
                extra_compile_args=["-O3", "-funroll-loops"],
                include_dirs=[numpy.get_include()],
            )
        ],
        language_level=3,
    )
)
