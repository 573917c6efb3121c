"""Build script: compiles the tube kernel extension when a toolchain is present.

The package works without the extension (a pure-Python kernel is selected at
import time), so a failed compile only costs speed, not functionality.
"""

import sys

from setuptools import setup


def extension_modules():
    try:
        import numpy
        from Cython.Build import cythonize
        from setuptools import Extension
    except ImportError as exc:
        print(f"truvar: building without compiled kernels ({exc})", file=sys.stderr)
        return []
    return cythonize(
        [
            Extension(
                "truvar._kernels",
                ["src/truvar/_kernels.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
            )
        ],
        language_level=3,
    )


setup(ext_modules=extension_modules())
