"""Pick the compiled kernels when importable, else the numpy fallback.

Set ``CUBEROOT_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _kernels_py

if os.environ.get("CUBEROOT_PURE_PYTHON", "") not in ("", "0"):
    kernels = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels as kernels
    except ImportError:
        kernels = _kernels_py
        BACKEND = "python"
    else:
        BACKEND = "cython"

reshaped_knots = _kernels_py.reshaped_knots

__all__ = ["BACKEND", "kernels", "reshaped_knots"]
