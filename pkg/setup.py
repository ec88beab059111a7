import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("MIDSUB_PURE", "") in ("", "0"):
    try:
        import numpy as np
        from Cython.Build import cythonize
    except ImportError:  # build without the compiled kernels
        pass
    else:
        ext_modules = cythonize(
            [Extension("midsub._kernels", ["src/midsub/_kernels.pyx"],
                       include_dirs=[np.get_include()])],
            language_level=3,
        )

setup(ext_modules=ext_modules)
