"""Wire the CMake-built extension into the source-tree package for testing.

MMFM_CORE_DIR points at the directory holding the built _core module; outside
the build tree a normal `pip install .` provides mmfm._core directly.
"""

import importlib
import os
import sys

core_dir = os.environ.get("MMFM_CORE_DIR")
if core_dir and core_dir not in sys.path:
    sys.path.insert(0, core_dir)
    sys.modules["mmfm._core"] = importlib.import_module("_core")
