"""Builds the pybind11 extension by delegating to the repository's CMake project."""

import shutil
import subprocess
import sys
from pathlib import Path

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class CMakeExtension(Extension):
    def __init__(self, name: str, sourcedir: str = "") -> None:
        super().__init__(name, sources=[])
        self.sourcedir = str(Path(sourcedir).resolve())


class CMakeBuild(build_ext):
    def build_extension(self, ext: CMakeExtension) -> None:
        build_dir = Path(self.build_temp).resolve() / "cmake"
        build_dir.mkdir(parents=True, exist_ok=True)

        config = "Debug" if self.debug else "Release"
        subprocess.run(
            [
                "cmake",
                ext.sourcedir,
                f"-DCMAKE_BUILD_TYPE={config}",
                f"-DPython_EXECUTABLE={sys.executable}",
                "-DFEDSIM_BUILD_PYTHON=ON",
            ],
            cwd=build_dir,
            check=True,
        )
        subprocess.run(
            ["cmake", "--build", ".", "--target", "fedsim_core", "-j"],
            cwd=build_dir,
            check=True,
        )

        built = sorted((build_dir / "python" / "fedsim").glob("_core*"))
        if not built:
            raise RuntimeError("CMake did not produce the _core extension module")
        ext_path = Path(self.get_ext_fullpath(ext.name)).resolve()
        ext_path.parent.mkdir(parents=True, exist_ok=True)
        shutil.copy2(built[-1], ext_path)


setup(
    ext_modules=[CMakeExtension("fedsim._core")],
    cmdclass={"build_ext": CMakeBuild},
)
