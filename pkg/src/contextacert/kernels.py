"""Kernel backend selection.

The compiled ``_kernels`` extension is used when importable; otherwise the
numpy implementation in ``_kernels_py`` is used. Setting the environment
variable ``CONTEXTACERT_PURE_PYTHON=1`` forces the fallback.
"""

import importlib
import os

from contextacert import _kernels_py

_FORCE_PY = os.environ.get("CONTEXTACERT_PURE_PYTHON", "") not in ("", "0")

try:
    if _FORCE_PY:
        raise ImportError("pure-Python backend forced")
    _impl = importlib.import_module("contextacert._kernels")
    BACKEND = "cython"
except ImportError:
    _impl = _kernels_py
    BACKEND = "python"

jacobi_eigh = _impl.jacobi_eigh
max_independent_set = _impl.max_independent_set
orthogonalize_pairs = _impl.orthogonalize_pairs


def available_backends():
    """Map backend name to module for every backend importable here."""
    found = {"python": _kernels_py}
    try:
        found["cython"] = importlib.import_module("contextacert._kernels")
    except ImportError:
        pass
    return found
