"""Timing comparison of the compiled kernels vs the numpy fallback.

Run:  python3 benchmarks/bench_kernels.py
"""

import time

import numpy as np

from latdyn.kernels import np_backend

try:
    from latdyn.kernels import _core
except ImportError:
    _core = None


def bench(label, fn, *args, repeat=20):
    fn(*args)  # warmup
    t0 = time.perf_counter()
    for _ in range(repeat):
        fn(*args)
    dt = (time.perf_counter() - t0) / repeat
    print(f"  {label:8s} {dt * 1e3:8.3f} ms")
    return dt


def main():
    rng = np.random.default_rng(0)

    print("im2col (16,64,32,32) k3 s2 p1")
    x = rng.standard_normal((16, 64, 32, 32)).astype(np.float32)
    a = bench("numpy", np_backend.im2col, x, 3, 3, 2, 1)
    if _core:
        b = bench("cython", _core.im2col, x, 3, 3, 2, 1)
        print(f"  speedup  {a / b:8.2f}x")

    print("col2im (16,64,32,32) k3 s2 p1")
    cols = np_backend.im2col(x, 3, 3, 2, 1)
    a = bench("numpy", np_backend.col2im, cols, x.shape, 3, 3, 2, 1)
    if _core:
        b = bench("cython", _core.col2im, cols, x.shape, 3, 3, 2, 1)
        print(f"  speedup  {a / b:8.2f}x")

    print("lbm_step 128x512 with cylinder mask")
    h, w = 128, 512
    f = np_backend.lbm_equilibrium(
        np.ones((h, w)), np.full((h, w), 0.1), np.zeros((h, w))
    )
    yy, xx = np.mgrid[0:h, 0:w]
    solid = (yy - h / 2) ** 2 + (xx - w / 4) ** 2 < (h / 8) ** 2
    a = bench("numpy", np_backend.lbm_step, f, solid, 0.8, repeat=10)
    if _core:
        b = bench("cython", _core.lbm_step, f, solid, 0.8, repeat=10)
        print(f"  speedup  {a / b:8.2f}x")

    if _core is None:
        print("compiled extension not available; numpy only")


if __name__ == "__main__":
    main()
