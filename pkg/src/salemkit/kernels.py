"""Kernel backend selection.

The compiled extension is used when it imports; otherwise the numpy versions.
Setting SALEMKIT_PURE_PYTHON=1 forces the numpy versions.
"""
import os

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py
if os.environ.get("SALEMKIT_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _compiled
    except ImportError:
        pass
    else:
        _impl = _compiled
        BACKEND = "cython"

exp_sum = _impl.exp_sum
ball_sums = _impl.ball_sums
grid_disc_counts = _impl.grid_disc_counts
