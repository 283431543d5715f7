"""Build script: compiles the optional RK4 stepping kernel.

The package works without the extension (a NumPy fallback is selected at
import time), so any compiler/Cython failure downgrades to a warning
instead of aborting the install.
"""
import sys

from setuptools import setup
from setuptools.command.build_ext import build_ext


def _extensions():
    try:
        import numpy
        from Cython.Build import cythonize
    except ImportError as exc:  # pragma: no cover - build environment only
        print(f"oscidec: skipping compiled kernel ({exc})", file=sys.stderr)
        return []
    from setuptools import Extension

    ext = Extension(
        "oscidec._kernels._master_cy",
        sources=["src/oscidec/_kernels/_master_cy.pyx"],
        include_dirs=[numpy.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
    return cythonize([ext], language_level="3")


class OptionalBuildExt(build_ext):
    """Swallow compiler errors; the pure-NumPy kernel remains available."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # pragma: no cover
            print(f"oscidec: compiled kernel build failed ({exc}); "
                  "falling back to the NumPy implementation", file=sys.stderr)

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:  # pragma: no cover
            print(f"oscidec: building {ext.name} failed ({exc}); "
                  "falling back to the NumPy implementation", file=sys.stderr)


setup(ext_modules=_extensions(), cmdclass={"build_ext": OptionalBuildExt})
