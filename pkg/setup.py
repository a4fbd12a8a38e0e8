from setuptools import Extension, setup
from Cython.Build import cythonize

# jetmarch._ckernels compiles the pure-mode source in _kernels.py (via an
# `include`), giving a fast extension alongside the interpreted fallback.
extensions = [
    Extension(
        "jetmarch._ckernels",
        ["src/jetmarch/_ckernels.pyx"],
        extra_compile_args=["-O3"],
    )
]

setup(
    ext_modules=cythonize(
        extensions,
        compiler_directives={"language_level": "3"},
    )
)
