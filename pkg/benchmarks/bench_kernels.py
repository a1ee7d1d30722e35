"""Compare the numba kernels with their numpy fallbacks.

    python benchmarks/bench_kernels.py [--n 2541] [--repeat 5]

Under ``WCNET_DISABLE_NUMBA=1`` the loop kernels run as plain Python, so the
loop column is skipped unless ``--python-loops`` is given (it is slow).
"""

import argparse
import timeit

import numpy as np

from wcnet import _kernels, coherence_pair, cwt, make_scale_grid
from wcnet.coherence import POWER_FLOOR, SmoothingParams, scale_kernel


def _best(func, repeat):
    func()  # compile / warm caches
    return min(timeit.repeat(func, number=1, repeat=repeat))


def cases(n, rng):
    grid = make_scale_grid(n)
    shape = (n, grid.num_scales)
    field = rng.standard_normal(shape)
    kernel = scale_kernel(grid, SmoothingParams().scale_window)
    cross = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    px, py = np.abs(cross) + rng.random(shape), np.abs(cross) + rng.random(shape)
    pts = rng.random((60, 3))
    d = np.sqrt(((pts[:, None] - pts[None]) ** 2).sum(axis=-1))
    start = np.arange(4, dtype=np.int64)
    return {
        "convolve_scales": ("_convolve_scales", (field, kernel)),
        "oriented_coherence": ("_oriented_coherence", (cross, px, py, POWER_FLOOR)),
        "pam_build (n=60, k=4)": ("_pam_build", (d, 4)),
        "pam_swap (n=60, k=4)": ("_pam_swap", (d, start, 1e-12, 1000)),
    }


def copy_args(args):
    return tuple(a.copy() if isinstance(a, np.ndarray) else a for a in args)


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--n", type=int, default=2541, help="series length")
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--python-loops", action="store_true")
    args = parser.parse_args(argv)
    rng = np.random.default_rng(0)

    print(f"numba active: {_kernels.HAS_NUMBA}  n={args.n}")
    print(f"{'kernel':<24}{'loops (s)':>12}{'numpy (s)':>12}{'ratio':>8}")
    for label, (stem, fargs) in cases(args.n, rng).items():
        loops = getattr(_kernels, stem + "_loops")
        numpy_ = getattr(_kernels, stem + "_numpy")
        t_np = _best(lambda: numpy_(*copy_args(fargs)), args.repeat)
        if _kernels.HAS_NUMBA or args.python_loops:
            t_lp = _best(lambda: loops(*copy_args(fargs)), args.repeat)
            print(f"{label:<24}{t_lp:>12.4f}{t_np:>12.4f}{t_np / t_lp:>8.2f}")
        else:
            print(f"{label:<24}{'-':>12}{t_np:>12.4f}{'-':>8}")

    grid = make_scale_grid(args.n)
    x, y = rng.standard_normal(args.n), rng.standard_normal(args.n)
    t = _best(lambda: coherence_pair(cwt(x, grid), cwt(y, grid)), args.repeat)
    print(f"coherence_pair end to end: {t:.4f} s")


if __name__ == "__main__":
    main()
