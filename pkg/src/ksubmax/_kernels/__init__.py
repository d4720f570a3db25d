"""Simplex pivot kernels: compiled extension with a pure-NumPy fallback.

The compiled kernel is selected at import when available; setting the
environment variable ``KSUBMAX_PURE_PYTHON`` to a non-empty value forces
the fallback.  Both kernels implement the same pivot rules.
"""

from __future__ import annotations

import os

from . import _simplex_py

try:
    from . import _simplex_cy
except ImportError:  # extension not built on this platform
    _simplex_cy = None

AT_LOWER = _simplex_py.AT_LOWER
AT_UPPER = _simplex_py.AT_UPPER
BASIC = _simplex_py.BASIC
OPTIMAL = _simplex_py.OPTIMAL
ITER_LIMIT = _simplex_py.ITER_LIMIT
UNBOUNDED = _simplex_py.UNBOUNDED


def available_kernels() -> dict:
    """Name -> module map of importable kernels."""
    out = {"python": _simplex_py}
    if _simplex_cy is not None:
        out["compiled"] = _simplex_cy
    return out


def active_kernel():
    if os.environ.get("KSUBMAX_PURE_PYTHON"):
        return _simplex_py
    return _simplex_cy if _simplex_cy is not None else _simplex_py


def active_kernel_name() -> str:
    return "python" if active_kernel() is _simplex_py else "compiled"
