"""Build the pybind11 extension through the project's CMake tree, so the
python module and the CLI share one compiled core."""

import shutil
import subprocess
import sys
from pathlib import Path

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class CMakeExtension(Extension):
    def __init__(self, name: str):
        super().__init__(name, sources=[])


class CMakeBuild(build_ext):
    def build_extension(self, ext: CMakeExtension) -> None:
        source_dir = Path(__file__).resolve().parent
        build_dir = Path(self.build_temp).resolve() / "cmake"
        build_dir.mkdir(parents=True, exist_ok=True)

        configure = [
            "cmake",
            "-S", str(source_dir),
            "-B", str(build_dir),
            "-GNinja",
            "-DCMAKE_BUILD_TYPE=Release",
            "-DBIPHOS_BUILD_PYTHON=ON",
            f"-DPython3_EXECUTABLE={sys.executable}",
        ]
        subprocess.run(configure, check=True)
        subprocess.run(
            ["cmake", "--build", str(build_dir), "--target", "_core"], check=True
        )

        module_dir = build_dir / "python" / "biphos"
        built = sorted(module_dir.glob("_core*.so")) + sorted(
            module_dir.glob("_core*.pyd")
        )
        if not built:
            raise RuntimeError(f"compiled module not found under {module_dir}")
        target = Path(self.get_ext_fullpath(ext.name)).resolve()
        target.parent.mkdir(parents=True, exist_ok=True)
        shutil.copy2(built[0], target)


setup(
    ext_modules=[CMakeExtension("biphos._core")],
    cmdclass={"build_ext": CMakeBuild},
    zip_safe=False,
)
