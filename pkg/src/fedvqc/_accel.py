"""Kernel backend selection.

``FEDVQC_KERNELS=numpy`` forces the pure-numpy kernels; ``numba`` (the default
when numba imports cleanly) uses the jitted ones. The choice is made once at
import time.
"""

import os

try:
    import numba  # noqa: F401

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - numba is installed in CI
    HAS_NUMBA = False

_requested = os.environ.get("FEDVQC_KERNELS", "").strip().lower()
if _requested not in ("", "numba", "numpy"):
    raise ImportError(f"FEDVQC_KERNELS must be 'numba' or 'numpy', got {_requested!r}")

USE_NUMBA = HAS_NUMBA and _requested != "numpy"
BACKEND = "numba" if USE_NUMBA else "numpy"

njit_kwargs = {"nogil": True, "cache": True}
