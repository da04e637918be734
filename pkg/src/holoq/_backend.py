"""Select the propagation kernel at import time.

The compiled ``_cf4`` extension is used when it was built; otherwise the numpy
implementation. Set ``HOLOQ_BACKEND=python`` to force the fallback.
"""
from __future__ import annotations

import os

from . import _kernels_py

BACKEND = "python"
expm_product = _kernels_py.expm_product

if os.environ.get("HOLOQ_BACKEND", "").lower() != "python":
    try:
        from . import _cf4
    except ImportError:  # extension not built
        pass
    else:
        BACKEND = "cython"
        expm_product = _cf4.expm_product


def get_kernel(name: str | None = None):
    """Return ``expm_product`` for ``"cython"``, ``"python"`` or the active backend."""
    if name is None:
        return expm_product
    if name == "python":
        return _kernels_py.expm_product
    if name == "cython":
        from . import _cf4
        return _cf4.expm_product
    raise ValueError(f"unknown backend {name!r}")
