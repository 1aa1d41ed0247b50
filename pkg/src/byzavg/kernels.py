"""Backend selection for the subset-scan kernels.

The compiled ``_ckernels`` extension is used when it imports; otherwise the
pure-Python ``_pykernels`` module.  Set ``BYZAVG_PURE_PYTHON=1`` to force the
fallback.
"""
from __future__ import annotations

import os

from . import _pykernels

if os.environ.get("BYZAVG_PURE_PYTHON", "") not in ("", "0"):
    _impl = _pykernels
else:
    try:
        from . import _ckernels as _impl
    except ImportError:
        _impl = _pykernels

BACKEND = "cython" if _impl is not _pykernels else "python"

canonical_subsets = _impl.canonical_subsets
strong_robust_scan = _impl.strong_robust_scan
strong_robust_wrt_scan = _impl.strong_robust_wrt_scan
r_robust_scan = _impl.r_robust_scan
f_resilient_scan = _impl.f_resilient_scan

# Bitmask width of the compiled backend.
MAX_NODES = 30
