from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # pure-Python install; the package falls back at import
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "ellipmpc._kernels",
                ["src/ellipmpc/_kernels.pyx"],
                extra_compile_args=["-O3"],
                optional=True,
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
