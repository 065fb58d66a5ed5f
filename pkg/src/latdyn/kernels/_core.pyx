# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled kernels: conv patch gather/scatter and the D2Q9 lattice update.

Must agree with ``np_backend`` up to float rounding; the parity tests in
tests/test_kernels.py enforce this for both float32 and float64.
"""


import numpy as np

cimport cython
cimport numpy as cnp

cnp.import_array()

ctypedef fused floating:
    float
    double

_LBM_CX = (0, 1, 0, -1, 0, 1, -1, -1, 1)
_LBM_CY = (0, 0, 1, 0, -1, 1, 1, -1, -1)
_LBM_W = (4.0 / 9,) + (1.0 / 9,) * 4 + (1.0 / 36,) * 4
_LBM_OPP = (0, 3, 4, 1, 2, 7, 8, 5, 6)


def im2col(x, int kh, int kw, int stride, int pad):
    """Gather conv patches. x: (N,C,H,W) -> (N, C*kh*kw, oh*ow)."""
    x = np.ascontiguousarray(x)
    if x.dtype == np.float32:
        return _im2col["float"](x, kh, kw, stride, pad)
    return _im2col["double"](np.asarray(x, dtype=np.float64), kh, kw, stride, pad)


def _im2col(const floating[:, :, :, ::1] x, int kh, int kw, int stride, int pad):
    cdef Py_ssize_t n = x.shape[0], c = x.shape[1], h = x.shape[2], w = x.shape[3]
    cdef Py_ssize_t oh = (h + 2 * pad - kh) // stride + 1
    cdef Py_ssize_t ow = (w + 2 * pad - kw) // stride + 1
    out_np = np.zeros((n, c * kh * kw, oh * ow),
                      dtype=np.float32 if floating is float else np.float64)
    cdef floating[:, :, ::1] out = out_np
    cdef Py_ssize_t b, ci, i, j, oy, ox, iy, ix, row
    for b in range(n):
        for ci in range(c):
            for i in range(kh):
                for j in range(kw):
                    row = (ci * kh + i) * kw + j
                    for oy in range(oh):
                        iy = oy * stride + i - pad
                        if iy < 0 or iy >= h:
                            continue
                        for ox in range(ow):
                            ix = ox * stride + j - pad
                            if ix < 0 or ix >= w:
                                continue
                            out[b, row, oy * ow + ox] = x[b, ci, iy, ix]
    return out_np


def col2im(cols, x_shape, int kh, int kw, int stride, int pad):
    """Scatter-add conv patches back; adjoint of im2col."""
    cols = np.ascontiguousarray(cols)
    if cols.dtype == np.float32:
        return _col2im["float"](cols, x_shape[0], x_shape[1], x_shape[2], x_shape[3],
                              kh, kw, stride, pad)
    return _col2im["double"](np.asarray(cols, dtype=np.float64), x_shape[0], x_shape[1],
                           x_shape[2], x_shape[3], kh, kw, stride, pad)


def _col2im(const floating[:, :, ::1] cols, Py_ssize_t n, Py_ssize_t c, Py_ssize_t h,
            Py_ssize_t w, int kh, int kw, int stride, int pad):
    cdef Py_ssize_t oh = (h + 2 * pad - kh) // stride + 1
    cdef Py_ssize_t ow = (w + 2 * pad - kw) // stride + 1
    out_np = np.zeros((n, c, h, w), dtype=np.float32 if floating is float else np.float64)
    cdef floating[:, :, :, ::1] out = out_np
    cdef Py_ssize_t b, ci, i, j, oy, ox, iy, ix, row
    for b in range(n):
        for ci in range(c):
            for i in range(kh):
                for j in range(kw):
                    row = (ci * kh + i) * kw + j
                    for oy in range(oh):
                        iy = oy * stride + i - pad
                        if iy < 0 or iy >= h:
                            continue
                        for ox in range(ow):
                            ix = ox * stride + j - pad
                            if ix < 0 or ix >= w:
                                continue
                            out[b, ci, iy, ix] += cols[b, row, oy * ow + ox]
    return out_np


def lbm_step(f, solid, double tau):
    """One collide-and-stream update with half-way bounce-back."""
    f = np.ascontiguousarray(f)
    solid_u8 = np.ascontiguousarray(solid, dtype=np.uint8)
    if f.dtype == np.float32:
        return _lbm_step["float"](f, solid_u8, tau)
    return _lbm_step["double"](np.asarray(f, dtype=np.float64), solid_u8, tau)


def _lbm_step(const floating[:, :, ::1] f, const unsigned char[:, ::1] solid, double tau):
    cdef Py_ssize_t h = f.shape[1], w = f.shape[2]
    cdef Py_ssize_t k, y, x, sy, sx
    cdef double rho, ux, uy, cu, usq, feq
    cdef int cx, cy
    fpost_np = np.empty((9, h, w), dtype=np.float32 if floating is float else np.float64)
    fnew_np = np.empty_like(fpost_np)
    cdef floating[:, :, ::1] fpost = fpost_np
    cdef floating[:, :, ::1] fnew = fnew_np
    cdef double[9] wts
    cdef int[9] icx, icy, iopp
    for k in range(9):
        wts[k] = _LBM_W[k]
        icx[k] = _LBM_CX[k]
        icy[k] = _LBM_CY[k]
        iopp[k] = _LBM_OPP[k]

    # collide
    for y in range(h):
        for x in range(w):
            rho = 0.0
            ux = 0.0
            uy = 0.0
            for k in range(9):
                rho += f[k, y, x]
                ux += icx[k] * f[k, y, x]
                uy += icy[k] * f[k, y, x]
            ux /= rho
            uy /= rho
            usq = ux * ux + uy * uy
            for k in range(9):
                cu = icx[k] * ux + icy[k] * uy
                feq = wts[k] * rho * (1.0 + 3.0 * cu + 4.5 * cu * cu - 1.5 * usq)
                fpost[k, y, x] = f[k, y, x] - (f[k, y, x] - feq) / tau

    # stream with periodic wrap, then bounce back out-of-solid populations
    for k in range(9):
        cx = icx[k]
        cy = icy[k]
        # +h/+w keeps the wrap positive under C modulo semantics (cdivision)
        for y in range(h):
            sy = (y - cy + h) % h
            for x in range(w):
                sx = (x - cx + w) % w
                if solid[sy, sx] and not solid[y, x]:
                    fnew[k, y, x] = fpost[iopp[k], y, x]
                else:
                    fnew[k, y, x] = fpost[k, sy, sx]
    return fnew_np
