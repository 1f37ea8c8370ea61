import os
import subprocess

from pybind11.setup_helpers import ParallelCompile, Pybind11Extension, build_ext
from setuptools import setup

CORE_SOURCES = [
    "src/arch.cpp",
    "src/bench.cpp",
    "src/image_io.cpp",
    "src/labels.cpp",
    "src/loss.cpp",
    "src/pipeline.cpp",
    "src/prediction_io.cpp",
    "src/viz.cpp",
    "bindings/module.cpp",
]


def eigen_include():
    env = os.environ.get("EIGEN3_INCLUDE_DIR")
    if env:
        return env
    try:
        out = subprocess.run(
            ["pkg-config", "--cflags-only-I", "eigen3"],
            capture_output=True, text=True, check=True,
        ).stdout.strip()
        if out.startswith("-I"):
            return out.split()[0][2:]
    except (OSError, subprocess.CalledProcessError):
        pass
    return "/usr/include/eigen3"


ParallelCompile("NPY_NUM_BUILD_JOBS").install()

setup(
    ext_modules=[
        Pybind11Extension(
            "sedge._core",
            CORE_SOURCES,
            include_dirs=["include", "vendor", eigen_include()],
            cxx_std=20,
        )
    ],
    cmdclass={"build_ext": build_ext},
)
