"""Build script: compiles the optional segmentation kernel.

The package is fully functional without the compiled extension; a pure
Python implementation of the same kernel is selected at import time when
the extension is unavailable.
"""

from setuptools import setup
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    """Compile extensions if possible, fall back to pure Python otherwise."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # missing compiler, broken toolchain
            print(f"warning: skipping compiled kernel ({exc}); "
                  f"the pure Python fallback will be used")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            print(f"warning: failed to build {ext.name} ({exc}); "
                  f"the pure Python fallback will be used")


try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        ["src/skillex/miner/_seg_core.pyx"],
        language_level=3,
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules, cmdclass={"build_ext": OptionalBuildExt})
