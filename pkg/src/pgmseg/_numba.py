"""
JIT compilation of the inner loops (power iteration and ICM sweeps).

Kernels decorated with `njit` are compiled by numba if it is installed. Without numba the
decorator returns the plain Python function and callers switch to their vectorized numpy
variant by checking `USE_NUMBA`. Set the environment variable ``PGMSEG_DISABLE_NUMBA=1`` to
force the numpy variants.
"""

import os
import warnings

USE_NUMBA = os.environ.get("PGMSEG_DISABLE_NUMBA", "0") not in ("1", "true", "yes")

try:
    from numba import njit
except ImportError:
    USE_NUMBA = False

    def njit(f=None, *args, **kwargs):
        # supports both @njit and @njit(cache=True)
        if callable(f):
            return f
        return lambda func: func


class PerformanceWarning(Warning):
    """Warning raised when segmentation runs on the numpy kernels only."""


if not USE_NUMBA and "PGMSEG_DISABLE_NUMBA" not in os.environ:
    warnings.warn(
        "numba is not installed, inference runs on numpy kernels (pip install pgmseg[numba])",
        PerformanceWarning,
        stacklevel=1,
    )
