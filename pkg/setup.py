"""Build script: compiles the optional graph-kernel extension.

The package works without the extension (a pure-numpy backend is selected
at import time); the build therefore tolerates a missing compiler or a
missing Cython and falls back to a pure-Python install.

-ffp-contract=off is required: the numpy fallback accumulates with separate
multiply and add instructions, and fused multiply-adds in the compiled
kernels would break bitwise parity between the two backends.
"""

from setuptools import setup

ext_modules = []
try:
    import numpy as np
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [
            Extension(
                "amlgraph.kernels._graph_core",
                sources=["src/amlgraph/kernels/_graph_core.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3", "-ffp-contract=off"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                optional=True,
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
