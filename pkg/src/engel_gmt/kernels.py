"""Backend selection for the hot loops.

The compiled extension is used when it imports; set ENGEL_GMT_PURE=1 to
force the numpy fallback (the test-suite runs both).
"""
import os

import numpy as np

from . import _kernels_py

_compiled = None
if os.environ.get("ENGEL_GMT_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _compiled
    except ImportError:  # extension not built
        _compiled = None

BACKEND = "compiled" if _compiled is not None else "python"
_impl = _compiled if _compiled is not None else _kernels_py


def use_backend(name):
    """Switch backend at runtime ('compiled' or 'python'); returns the previous name."""
    global _impl, BACKEND
    prev = BACKEND
    if name == "compiled":
        if _compiled is None:
            raise RuntimeError("compiled kernels are not available")
        _impl = _compiled
    elif name == "python":
        _impl = _kernels_py
    else:
        raise ValueError(f"unknown backend {name!r}")
    BACKEND = name
    return prev


def compiled_available():
    return _compiled is not None


def row_intervals(coef, bounds, s, t_lo, t_hi):
    return _impl.row_intervals(coef, np.asarray(bounds, dtype=float),
                               np.asarray(s, dtype=float), float(t_lo), float(t_hi))


def bch_quasinorm(x, y, q):
    x = np.ascontiguousarray(np.atleast_2d(x), dtype=float)
    y = np.ascontiguousarray(np.atleast_2d(y), dtype=float)
    xi = q.xi
    return _impl.bch_quasinorm(x, y, float(xi.xi12), float(xi.xi13), float(xi.xi23),
                               float(q.kappa3), float(q.kappa4))
