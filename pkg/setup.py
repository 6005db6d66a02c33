from setuptools import Extension, setup

# The compiled kernels are optional: without Cython (or a C compiler) the
# package falls back to the pure-Python implementations in treegrp._pyops.
try:
    from Cython.Build import cythonize
except ImportError:
    ext_modules = []
else:
    ext_modules = cythonize(
        [Extension("treegrp._speedups", ["src/treegrp/_speedups.pyx"])],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
