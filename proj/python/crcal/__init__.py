"""Two-transmon cross-resonance gate calibration and benchmarking simulator.

Thin wrapper around the compiled `_core` extension. In a source checkout the
module may live in the CMake build tree instead of this package; point
CRCAL_MODULE_DIR at that directory to use it without installing.
"""

try:
    from ._core import *  # noqa: F401,F403
    from ._core import __version__  # noqa: F401
except ImportError:
    import os
    import sys

    _module_dir = os.environ.get("CRCAL_MODULE_DIR")
    if not _module_dir:
        raise
    sys.path.insert(0, _module_dir)
    from _core import *  # noqa: F401,F403
    from _core import __version__  # noqa: F401
