"""Build the risp._core extension by delegating to the CMake project."""

import pathlib
import subprocess
import sys

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class CMakeExtension(Extension):
    def __init__(self, name):
        super().__init__(name, sources=[])


class CMakeBuild(build_ext):
    def build_extension(self, ext):
        source_dir = pathlib.Path(__file__).resolve().parent
        # Where setuptools expects the built module (wheel dir or, for
        # editable installs, python/risp/ in the source tree).
        module_dir = pathlib.Path(self.get_ext_fullpath(ext.name)).resolve().parent
        build_dir = pathlib.Path(self.build_temp).resolve() / "cmake"
        build_dir.mkdir(parents=True, exist_ok=True)
        subprocess.run(
            [
                "cmake",
                "-S", str(source_dir),
                "-B", str(build_dir),
                "-DCMAKE_BUILD_TYPE=Release",
                "-DRISP_BUILD_CLI=OFF",
                "-DRISP_BUILD_TESTS=OFF",
                "-DRISP_BUILD_PYTHON=ON",
                f"-DRISP_PYTHON_MODULE_DIR={module_dir}",
                f"-DPython_EXECUTABLE={sys.executable}",
            ],
            check=True,
        )
        subprocess.run(
            ["cmake", "--build", str(build_dir), "--parallel", "--target", "risp_python"],
            check=True,
        )


setup(ext_modules=[CMakeExtension("risp._core")], cmdclass={"build_ext": CMakeBuild})
