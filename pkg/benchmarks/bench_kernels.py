"""Compare the jitted and pure-NumPy kernel backends.

Run as `python benchmarks/bench_kernels.py`.  Both backends are imported
directly, so the EMORANK_NO_NUMBA flag does not change what is measured;
it only affects which backend the package itself dispatches to.
"""

import argparse
import time

import numpy as np

from emorank import kernels

DTW_SIZES = ((200, 200), (500, 500), (1000, 800))
AUTOCORR_SIZES = ((100, 400), (300, 640))
LAG_RANGE = (40, 267)


def bench(func, *args, warmup=True, repeat=5):
    if warmup:
        func(*args)
    t0 = time.perf_counter()
    for _ in range(repeat):
        func(*args)
    t1 = time.perf_counter()
    return (t1 - t0) / repeat


def bench_dtw(repeat: int) -> None:
    rng = np.random.default_rng(0)
    print("dtw_table (accumulated-cost table)")
    for n, m in DTW_SIZES:
        cost = np.abs(rng.normal(size=(n, m)))
        t_np = bench(kernels.dtw_table_numpy, cost, warmup=False, repeat=repeat)
        line = f"  {n:5d} x {m:<5d} numpy {t_np * 1e3:9.2f} ms"
        if kernels.HAVE_NUMBA:
            t_nb = bench(kernels.dtw_table_numba, cost, repeat=repeat)
            line += f"   numba {t_nb * 1e3:9.2f} ms   ({t_np / t_nb:5.1f}x)"
        print(line)


def bench_autocorr(repeat: int) -> None:
    rng = np.random.default_rng(1)
    lag_min, lag_max = LAG_RANGE
    print(f"autocorr_matrix (lags {lag_min}..{lag_max})")
    for n_frames, frame_len in AUTOCORR_SIZES:
        frames = rng.normal(size=(n_frames, frame_len))
        t_np = bench(kernels.autocorr_matrix_numpy, frames, lag_min, lag_max,
                     warmup=False, repeat=repeat)
        line = f"  {n_frames:5d} x {frame_len:<5d} numpy {t_np * 1e3:9.2f} ms"
        if kernels.HAVE_NUMBA:
            t_nb = bench(kernels.autocorr_matrix_numba, frames, lag_min, lag_max,
                         repeat=repeat)
            line += f"   numba {t_nb * 1e3:9.2f} ms   ({t_np / t_nb:5.1f}x)"
        print(line)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5,
                        help="timed repetitions per case (default 5)")
    args = parser.parse_args()
    if not kernels.HAVE_NUMBA:
        print("numba is not installed; timing the NumPy backend only")
    print(f"active package backend: {kernels.active_backend()}")
    bench_dtw(args.repeat)
    bench_autocorr(args.repeat)


if __name__ == "__main__":
    main()
