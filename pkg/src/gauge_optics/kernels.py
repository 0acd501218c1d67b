"""Backend selection for the hot loops.

The compiled extension is used when it was built; otherwise, or when
``GAUGE_OPTICS_PURE_PYTHON=1`` is set before import, the numpy versions in
:mod:`gauge_optics._kernels_py` are used. Both expose the same functions.
"""
from __future__ import annotations

import os

from . import _kernels_py

if os.environ.get("GAUGE_OPTICS_PURE_PYTHON") == "1":
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]
        BACKEND = "compiled"
    except ImportError:
        _impl = _kernels_py
        BACKEND = "python"

apply_potential = _impl.apply_potential
ordered_product = _impl.ordered_product

__all__ = ["BACKEND", "apply_potential", "ordered_product", "backends"]


def backends() -> dict:
    """Every importable backend by name, for equivalence tests and benchmarks."""
    out = {"python": _kernels_py}
    try:
        from . import _kernels
        out["compiled"] = _kernels
    except ImportError:
        pass
    return out
