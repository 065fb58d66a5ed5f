"""Hot numerical kernels with backend selection at import time.

Prefers the compiled Cython extension (``latdyn.kernels._core``) and falls
back to pure numpy. Set ``LATDYN_FORCE_NUMPY=1`` to force the fallback.
``benchmarks/bench_kernels.py`` compares the two.
"""

import os

from . import np_backend
from .np_backend import LBM_CX, LBM_CY, LBM_OPP, LBM_W, lbm_equilibrium

BACKEND = "numpy"
im2col = np_backend.im2col
col2im = np_backend.col2im
lbm_step = np_backend.lbm_step

if not os.environ.get("LATDYN_FORCE_NUMPY"):
    try:
        from . import _core

        im2col = _core.im2col
        col2im = _core.col2im
        lbm_step = _core.lbm_step
        BACKEND = "cython"
    except ImportError:
        pass

__all__ = [
    "BACKEND",
    "im2col",
    "col2im",
    "lbm_step",
    "lbm_equilibrium",
    "LBM_CX",
    "LBM_CY",
    "LBM_W",
    "LBM_OPP",
    "np_backend",
]
