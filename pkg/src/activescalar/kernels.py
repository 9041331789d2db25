"""Pair-scan kernels: compiled extension when available, NumPy otherwise.

Set ``ACTIVESCALAR_PURE_PYTHON=1`` to force the fallback.
"""
import os

from . import _scan_py

BACKEND = "python"
if not os.environ.get("ACTIVESCALAR_PURE_PYTHON"):
    try:
        from . import _scan as _impl

        BACKEND = "compiled"
    except ImportError:
        _impl = _scan_py
else:
    _impl = _scan_py

max_gap_scan = _impl.max_gap_scan
max_ratio_scan = _impl.max_ratio_scan
