from setuptools import Extension, setup
from Cython.Build import cythonize

ext = Extension(
    "schottkylab._kernels._fast",
    ["src/schottkylab/_kernels/_fast.pyx"],
)

setup(
    ext_modules=cythonize(
        [ext],
        language_level="3",
        compiler_directives={"boundscheck": False, "wraparound": False, "cdivision": True},
    ),
)
