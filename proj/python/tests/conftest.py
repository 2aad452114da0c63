import os
import sys

# The extension is importable from an installed wheel; for in-tree runs the
# build directory is handed over via GTSIM_PYMODULE_DIR.
_module_dir = os.environ.get("GTSIM_PYMODULE_DIR")
if _module_dir and _module_dir not in sys.path:
    sys.path.insert(0, _module_dir)
