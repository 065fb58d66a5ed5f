"""Pure numpy implementations of the hot kernels.

These are the reference implementations; the compiled extension in
``_core.pyx`` must agree with them bit-for-bit up to float rounding.
"""

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view


def im2col(x, kh, kw, stride, pad):
    """Gather conv patches. x: (N,C,H,W) -> (N, C*kh*kw, oh*ow)."""
    n, c, h, w = x.shape
    if pad:
        x = np.pad(x, ((0, 0), (0, 0), (pad, pad), (pad, pad)))
    oh = (h + 2 * pad - kh) // stride + 1
    ow = (w + 2 * pad - kw) // stride + 1
    win = sliding_window_view(x, (kh, kw), axis=(2, 3))[:, :, ::stride, ::stride]
    # (N,C,oh,ow,kh,kw) -> (N, C,kh,kw, oh*ow)
    cols = win.transpose(0, 1, 4, 5, 2, 3).reshape(n, c * kh * kw, oh * ow)
    return np.ascontiguousarray(cols)


def col2im(cols, x_shape, kh, kw, stride, pad):
    """Scatter-add conv patches back; adjoint of im2col."""
    n, c, h, w = x_shape
    oh = (h + 2 * pad - kh) // stride + 1
    ow = (w + 2 * pad - kw) // stride + 1
    xp = np.zeros((n, c, h + 2 * pad, w + 2 * pad), dtype=cols.dtype)
    cols = cols.reshape(n, c, kh, kw, oh, ow)
    for i in range(kh):
        for j in range(kw):
            xp[:, :, i : i + stride * oh : stride, j : j + stride * ow : stride] += cols[:, :, i, j]
    if pad:
        return xp[:, :, pad:-pad, pad:-pad].copy()
    return xp


# D2Q9 lattice: index 0 rest, 1-4 axis-aligned, 5-8 diagonal.
LBM_CX = np.array([0, 1, 0, -1, 0, 1, -1, -1, 1], dtype=np.int64)
LBM_CY = np.array([0, 0, 1, 0, -1, 1, 1, -1, -1], dtype=np.int64)
LBM_W = np.array([4 / 9] + [1 / 9] * 4 + [1 / 36] * 4)
LBM_OPP = np.array([0, 3, 4, 1, 2, 7, 8, 5, 6], dtype=np.int64)


def lbm_equilibrium(rho, ux, uy):
    """BGK equilibrium distributions for all 9 directions."""
    feq = np.empty((9,) + rho.shape, dtype=rho.dtype)
    usq = ux * ux + uy * uy
    for k in range(9):
        cu = LBM_CX[k] * ux + LBM_CY[k] * uy
        feq[k] = LBM_W[k] * rho * (1.0 + 3.0 * cu + 4.5 * cu * cu - 1.5 * usq)
    return feq


def lbm_step(f, solid, tau):
    """One collide-and-stream update with half-way bounce-back.

    f: (9,H,W) distributions (axis 1 = y, axis 2 = x), periodic wrap;
    solid: (H,W) bool obstacle mask; tau: BGK relaxation time.
    """
    rho = f.sum(axis=0)
    ux = (f * LBM_CX[:, None, None]).sum(axis=0) / rho
    uy = (f * LBM_CY[:, None, None]).sum(axis=0) / rho
    feq = lbm_equilibrium(rho, ux, uy)
    fpost = f - (f - feq) / tau
    fnew = np.empty_like(f)
    for k in range(9):
        fnew[k] = np.roll(fpost[k], (LBM_CY[k], LBM_CX[k]), axis=(0, 1))
        if solid.any():
            # populations that streamed out of a solid node bounce back instead
            src_solid = np.roll(solid, (LBM_CY[k], LBM_CX[k]), axis=(0, 1))
            fix = src_solid & ~solid
            fnew[k][fix] = fpost[LBM_OPP[k]][fix]
    return fnew
