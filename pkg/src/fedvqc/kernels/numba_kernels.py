"""numba-jitted versions of :mod:`fedvqc.kernels.numpy_kernels`."""

import numpy as np
from numba import njit

from .._accel import njit_kwargs


@njit(**njit_kwargs)
def apply_1q(state, mats, stride):
    B, D = state.shape
    half = D // 2
    shared = mats.shape[0] == 1
    low = stride - 1
    for b in range(B):
        k = 0 if shared else b
        m00 = mats[k, 0, 0]
        m01 = mats[k, 0, 1]
        m10 = mats[k, 1, 0]
        m11 = mats[k, 1, 1]
        for g in range(half):
            i0 = ((g & ~low) << 1) | (g & low)
            i1 = i0 | stride
            a0 = state[b, i0]
            a1 = state[b, i1]
            state[b, i0] = m00 * a0 + m01 * a1
            state[b, i1] = m10 * a0 + m11 * a1
    return state


@njit(**njit_kwargs)
def apply_cnot(state, cstride, tstride):
    B, D = state.shape
    for b in range(B):
        for i in range(D):
            if (i & cstride) and not (i & tstride):
                j = i | tstride
                tmp = state[b, i]
                state[b, i] = state[b, j]
                state[b, j] = tmp
    return state


@njit(**njit_kwargs)
def _z_expectations(state, strides):
    B, D = state.shape
    out = np.zeros((B, strides.shape[0]))
    for b in range(B):
        for i in range(D):
            a = state[b, i]
            p = a.real * a.real + a.imag * a.imag
            for c in range(strides.shape[0]):
                if i & strides[c]:
                    out[b, c] -= p
                else:
                    out[b, c] += p
    return out


def z_expectations(state, strides):
    return _z_expectations(state, np.asarray(strides, dtype=np.int64))
