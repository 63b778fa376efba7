"""Pure-numpy batched statevector kernels.

``state`` is a C-contiguous ``(B, 2**n)`` complex128 array updated in place.
``stride`` is ``1 << (n - 1 - qubit)``: qubit 0 is the most significant bit.
"""

import numpy as np


def apply_1q(state, mats, stride):
    """Apply a 2x2 matrix per row (``mats`` is ``(B, 2, 2)`` or ``(1, 2, 2)``)."""
    B, D = state.shape
    view = state.reshape(B, D // (2 * stride), 2, stride)
    a0 = view[:, :, 0, :].copy()
    a1 = view[:, :, 1, :]
    m = mats[:, :, :, None, None]
    view[:, :, 0, :] = m[:, 0, 0] * a0 + m[:, 0, 1] * a1
    view[:, :, 1, :] = m[:, 1, 0] * a0 + m[:, 1, 1] * a1
    return state


_perm_cache = {}


def _cnot_perm(dim, cstride, tstride):
    key = (dim, cstride, tstride)
    perm = _perm_cache.get(key)
    if perm is None:
        idx = np.arange(dim)
        perm = np.where(idx & cstride, idx ^ tstride, idx)
        _perm_cache[key] = perm
    return perm


def apply_cnot(state, cstride, tstride):
    state[:] = state[:, _cnot_perm(state.shape[1], cstride, tstride)]
    return state


def z_expectations(state, strides):
    """<Z_q> per row for each readout stride; returns ``(B, len(strides))``."""
    probs = state.real**2 + state.imag**2
    idx = np.arange(state.shape[1])
    signs = np.stack([np.where(idx & s, -1.0, 1.0) for s in strides], axis=1)
    return probs @ signs
