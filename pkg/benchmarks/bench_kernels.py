"""Time the numba kernels against their pure-numpy fallbacks.

    python3 benchmarks/bench_kernels.py [--repeat 5] [--scale 1.0]

Both variants are imported from the same module and called directly, so one
process measures both regardless of TORUS_OBS_BACKEND.  Each numba kernel is
called once before timing to keep compilation out of the numbers.
"""

import argparse
import time

import numpy as np

from torus_obs import kernels
from torus_obs._accel import HAVE_NUMBA
from torus_obs.lattice import _pairwise_sq, enumerate_sphere
from torus_obs.observability import gram_matrix


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases(scale):
    rng = np.random.default_rng(0)

    rho = np.linspace(0.0, 500.0, int(2_000_000 * scale))
    yield "ball_kernel d=3", (lambda: kernels.ball_kernel_loop(3, rho)), (lambda: kernels.ball_kernel_numpy(3, rho))

    G = gram_matrix(enumerate_sphere(3, 50), 0.3).entries  # 84 x 84
    yield ("jacobi 84x84", (lambda: kernels.jacobi_eigh_loop(G, 1e-12, 100)),
           (lambda: kernels.jacobi_eigh_numpy(G, 1e-12, 100)))

    pts = enumerate_sphere(2, 5525).points  # 48 points
    freqs = pts.astype(np.float64)
    coef = rng.normal(size=len(pts)) + 1j * rng.normal(size=len(pts))
    x = rng.uniform(-1, 1, size=(int(200_000 * scale), 2))
    cre, cim = np.ascontiguousarray(coef.real), np.ascontiguousarray(coef.imag)
    yield ("expsum 48 terms", (lambda: kernels.expsum_abs_loop(freqs, cre, cim, x)),
           (lambda: kernels.expsum_abs_numpy(freqs, cre, cim, x)))

    big = enumerate_sphere(3, 1105).points
    ii, jj = np.nonzero(np.triu(_pairwise_sq(big) < 200, 1))
    ii, jj = ii.astype(np.int64), jj.astype(np.int64)
    yield (f"union_find {len(big)} pts", (lambda: kernels.union_find_loop(len(big), ii, jj)),
           (lambda: kernels.union_find_numpy(len(big), ii, jj)))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--scale", type=float, default=1.0, help="multiplies the array sizes")
    args = ap.parse_args()
    if not HAVE_NUMBA:
        print("numba is unavailable or disabled; the 'numba' column runs the Python loops uncompiled")
    print(f"{'kernel':<24}{'numba [s]':>12}{'numpy [s]':>12}{'speedup':>10}")
    for name, fast, slow in cases(args.scale):
        fast()
        t_fast = best_of(fast, args.repeat)
        t_slow = best_of(slow, args.repeat)
        print(f"{name:<24}{t_fast:>12.4f}{t_slow:>12.4f}{t_slow / t_fast:>10.1f}x")


if __name__ == "__main__":
    main()
