"""Kernel backend selection.

The compiled extension is preferred when importable; otherwise the numpy
implementations are used.  Setting the environment variable
``LOSDOF_DISABLE_EXT=1`` before import forces the numpy path (useful for
debugging and for the backend-equivalence tests).
"""

import os

if os.environ.get("LOSDOF_DISABLE_EXT") == "1":
    from . import _kernels_py as kernels

    COMPILED = False
else:
    try:
        from . import _kernels_cy as kernels  # type: ignore[no-redef]

        COMPILED = True
    except ImportError:
        from . import _kernels_py as kernels  # type: ignore[no-redef]

        COMPILED = False


def backend_name() -> str:
    """Name of the active kernel backend, recorded in result artifacts."""
    return "compiled" if COMPILED else "numpy"
