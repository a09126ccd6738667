"""Kernel backend selection.

Prefers the compiled extension (ordonnance._kernels, built from Cython) and
falls back to the pure-Python implementations. Set ORDONNANCE_PURE_PYTHON=1
to force the fallback, e.g. for benchmarking or debugging.
"""

from __future__ import annotations

import os

if os.environ.get("ORDONNANCE_PURE_PYTHON") == "1":
    from . import _kernels_py as _impl

    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]

        BACKEND = "cython"
    except ImportError:
        from . import _kernels_py as _impl

        BACKEND = "python"

similarity = _impl.similarity
levenshtein_leq1 = _impl.levenshtein_leq1

__all__ = ["BACKEND", "similarity", "levenshtein_leq1"]
