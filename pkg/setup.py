from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
    ext_modules = cythonize(
        [Extension("mettagraph._refine", ["src/mettagraph/_refine.pyx"])],
        compiler_directives={"language_level": "3"},
        quiet=True,
    )
except ImportError:  # pure-Python fallback is selected at import time
    ext_modules = []

setup(ext_modules=ext_modules)
