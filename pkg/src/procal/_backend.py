"""Kernel backend selection.

The compiled extension is used when it imports; set ``PROCAL_PURE_PYTHON=1``
to force the numpy fallback.
"""
import os

from . import _fallback

NAME = "python"
kernels = _fallback

if os.environ.get("PROCAL_PURE_PYTHON", "0") in ("", "0"):
    try:
        from . import _kernels as kernels  # noqa: F811
        NAME = "cython"
    except ImportError:
        pass


def available() -> dict:
    """All importable backends by name, for benchmarks and equivalence tests."""
    found = {"python": _fallback}
    try:
        from . import _kernels
        found["cython"] = _kernels
    except ImportError:
        pass
    return found
