"""Dispatch for the hot loops: compiled extension when built, numpy otherwise.

Set ``SINHLAB_PURE_PYTHON=1`` to force the numpy fallback.
"""

from __future__ import annotations

import os

from . import _kernels_py

BACKEND = "python"
gamma1_solve = _kernels_py.gamma1_solve
log_kernel_sums = _kernels_py.log_kernel_sums

if os.environ.get("SINHLAB_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels  # type: ignore[attr-defined]
    except ImportError:
        pass
    else:
        BACKEND = "cython"
        gamma1_solve = _ckernels.gamma1_solve
        log_kernel_sums = _ckernels.log_kernel_sums

scaled_arctanh = _kernels_py.scaled_arctanh
