"""Partition refinement backend, compiled when available.

Set ``METTAGRAPH_PURE=1`` to force the pure-Python implementation.
"""

import os

from . import _refine_py

if os.environ.get("METTAGRAPH_PURE"):
    _impl, BACKEND = _refine_py.refine_history, "python"
else:
    try:
        from ._refine import refine_history as _impl
        BACKEND = "cython"
    except ImportError:
        _impl, BACKEND = _refine_py.refine_history, "python"


def refine_history(n, src, act, dst, init=None, backend=None):
    """Block vectors after each refinement round (last one is stable)."""
    if backend == "python":
        return _refine_py.refine_history(n, src, act, dst, init)
    if backend not in (None, BACKEND):
        raise ValueError(f"backend {backend!r} unavailable (active: {BACKEND})")
    return _impl(n, src, act, dst, init)
