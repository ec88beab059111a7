"""Kernel selection: the compiled extension when available, else pure Python.

Set ``MIDSUB_PURE=1`` to force the pure-Python kernels.
"""

from __future__ import annotations

import os

BACKEND = "python"

if os.environ.get("MIDSUB_PURE", "") not in ("", "0"):
    from ._kernels_py import power_iteration, reachable_positive_column
else:
    try:
        from ._kernels import power_iteration, reachable_positive_column
        BACKEND = "cython"
    except ImportError:  # extension not built
        from ._kernels_py import power_iteration, reachable_positive_column

__all__ = ["BACKEND", "power_iteration", "reachable_positive_column"]
