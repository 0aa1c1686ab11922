"""Build script. The compiled condition-VM is optional: if Cython or a C
compiler is unavailable the package installs with the pure-Python VM only."""

from setuptools import setup

ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        ["src/dbpsim/rules/_vmext.pyx"],
        language_level="3",
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
