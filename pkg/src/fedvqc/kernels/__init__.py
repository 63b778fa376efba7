"""Hot statevector kernels, dispatched to numba or numpy (see ``fedvqc._accel``)."""

from .._accel import BACKEND, USE_NUMBA
from . import numpy_kernels

if USE_NUMBA:
    from . import numba_kernels as _impl
else:
    _impl = numpy_kernels

apply_1q = _impl.apply_1q
apply_cnot = _impl.apply_cnot
z_expectations = _impl.z_expectations

__all__ = ["BACKEND", "apply_1q", "apply_cnot", "z_expectations", "numpy_kernels"]
