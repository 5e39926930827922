"""Kernel backend selection.

The compiled extension is used when it imports; set ``ARITHQSM_PURE=1`` to
force the pure-Python versions.  ``BACKEND`` names the active choice.
"""

from __future__ import annotations

import os
from types import ModuleType

from . import _kernels_py


def load_backend(name: str) -> ModuleType:
    if name == "python":
        return _kernels_py
    if name == "cython":
        from . import _kernels  # type: ignore[attr-defined]

        return _kernels
    raise ValueError(f"unknown kernel backend {name!r}")


def available_backends() -> list[str]:
    names = ["python"]
    try:
        load_backend("cython")
    except ImportError:
        pass
    else:
        names.insert(0, "cython")
    return names


if os.environ.get("ARITHQSM_PURE"):
    _impl = _kernels_py
else:
    try:
        _impl = load_backend("cython")
    except ImportError:
        _impl = _kernels_py

BACKEND = "python" if _impl is _kernels_py else "cython"

ddf_pattern = _impl.ddf_pattern
dirichlet_convolve = _impl.dirichlet_convolve
assemble_multiplicative = _impl.assemble_multiplicative
