"""Kernel backend selection.

The compiled extension is preferred; the numpy fallback is used when it is
missing or when ``CLIPTRACK_PURE_PYTHON`` is set to a non-empty value.
"""

import os

from cliptrack import _kernels_py

if os.environ.get("CLIPTRACK_PURE_PYTHON"):
    _impl = _kernels_py
else:
    try:
        from cliptrack import _kernels as _impl
    except ImportError:
        _impl = _kernels_py

BACKEND = "python" if _impl is _kernels_py else "cython"

waterfill = _impl.waterfill
omd_step = _impl.omd_step
prod_step = _impl.prod_step
switching_dp = _impl.switching_dp
jacobi_eigh = _impl.jacobi_eigh
jacobi_eigh_batch = _impl.jacobi_eigh_batch


def available_backends():
    """Map of backend name to kernel module for every backend that imports."""
    found = {"python": _kernels_py}
    try:
        from cliptrack import _kernels
    except ImportError:
        pass
    else:
        found["cython"] = _kernels
    return found
