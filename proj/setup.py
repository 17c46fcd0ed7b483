"""Builds the _icmdrift extension; everything else lives in pyproject.toml."""

from glob import glob

from pybind11.setup_helpers import Pybind11Extension, build_ext
from setuptools import setup

setup(
    ext_modules=[
        Pybind11Extension(
            "icmdrift._icmdrift",
            sorted(glob("src/*.cpp")) + ["python/bindings.cpp"],
            include_dirs=["include", "vendor"],
            cxx_std=20,
        )
    ],
    cmdclass={"build_ext": build_ext},
)
