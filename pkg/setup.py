import os

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class optional_build_ext(build_ext):
    """Build the compiled kernels when a toolchain is available.

    Installation never fails because of the extension: the package selects
    the pure-Python kernels at import time when the compiled module is
    missing (see ordonnance.kernels).
    """

    def run(self):
        try:
            super().run()
        except Exception as exc:  # compiler missing, broken headers, ...
            print(f"warning: skipping compiled kernels ({exc}); pure-Python fallback will be used")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            print(f"warning: could not build {ext.name} ({exc}); pure-Python fallback will be used")


ext_modules = []
if os.environ.get("ORDONNANCE_NO_EXTENSION") != "1":
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [Extension("ordonnance._kernels", ["src/ordonnance/_kernels.pyx"])],
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        print("warning: Cython not available; installing without compiled kernels")

setup(ext_modules=ext_modules, cmdclass={"build_ext": optional_build_ext})
