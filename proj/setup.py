import os

from pybind11.setup_helpers import Pybind11Extension, build_ext
from setuptools import setup

SOURCES = [
    "src/geometry.cpp",
    "src/timegrid.cpp",
    "src/quadrature.cpp",
    "src/assembly.cpp",
    "src/mot.cpp",
    "src/potentials.cpp",
    "src/analysis.cpp",
    "src/studies.cpp",
    "src/bindings.cpp",
]

eigen = os.environ.get("EIGEN_INCLUDE", "/usr/include/eigen3")

ext = Pybind11Extension(
    "tdbem._tdbem",
    SOURCES,
    include_dirs=["include", "vendor", eigen],
    cxx_std=20,
    extra_compile_args=["-O2"],
)

setup(ext_modules=[ext], cmdclass={"build_ext": build_ext})
