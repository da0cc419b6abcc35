"""Build script: compiles the optional Cython kernel extension.

The package works without the extension (pure-Python kernels are selected
at import time); set CLAUSEVIZ_PURE=1 to skip the compile entirely.
"""

import os
import sys

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class optional_build_ext(build_ext):
    """Degrade to a pure-Python install if the C toolchain is unusable."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # compiler missing, headers missing, ...
            print(f"warning: skipping C kernels ({exc}); "
                  "falling back to pure-Python kernels", file=sys.stderr)

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            print(f"warning: could not build {ext.name} ({exc}); "
                  "falling back to pure-Python kernels", file=sys.stderr)


ext_modules = []
cmdclass = {}
if os.environ.get("CLAUSEVIZ_PURE") != "1":
    try:
        import numpy
        from Cython.Build import cythonize

        ext = Extension(
            "clauseviz.kernels._ckern",
            ["src/clauseviz/kernels/_ckern.pyx"],
            include_dirs=[numpy.get_include()],
            # -ffp-contract=off keeps double arithmetic bit-identical to the
            # pure-Python kernels (no FMA contraction).
            extra_compile_args=["-O2", "-ffp-contract=off"],
            define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        )
        ext_modules = cythonize([ext], language_level=3)
        cmdclass["build_ext"] = optional_build_ext
    except ImportError as exc:
        print(f"warning: Cython/numpy unavailable ({exc}); "
              "installing pure-Python kernels only", file=sys.stderr)

setup(ext_modules=ext_modules, cmdclass=cmdclass)
