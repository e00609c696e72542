import os

import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # pure-Python fallback still installs
    cythonize = None

extra = ["/O2"] if os.name == "nt" else ["-O3"]

ext_modules = []
if cythonize is not None and not os.environ.get("KWGRAPH_NO_EXT"):
    ext_modules = cythonize(
        [
            Extension(
                "kwgraph.hop2._core",
                ["src/kwgraph/hop2/_core.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=extra,
                language="c++",
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
