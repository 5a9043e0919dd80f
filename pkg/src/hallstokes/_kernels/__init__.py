"""Kernel backend selection.

The compiled extension is used when it is importable, unless the
environment variable ``HALLSTOKES_PURE_PYTHON`` is set to a true value.
"""
from __future__ import annotations

import os

from . import _fallback

BACKEND = "python"
_impl = _fallback

if os.environ.get("HALLSTOKES_PURE_PYTHON", "").lower() not in ("1", "true", "yes"):
    try:
        from . import _ckernels as _impl  # type: ignore[no-redef]
        BACKEND = "compiled"
    except ImportError:
        _impl = _fallback

hall_accumulate_int = _impl.hall_accumulate_int
hall_accumulate_complex = _impl.hall_accumulate_complex
collocation_sweep = _impl.collocation_sweep

__all__ = ["BACKEND", "hall_accumulate_int", "hall_accumulate_complex", "collocation_sweep"]
