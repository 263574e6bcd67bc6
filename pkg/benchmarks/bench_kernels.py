"""Time the numba kernels against their numpy fallbacks.

    python3 benchmarks/bench_kernels.py --n 1000000 --repeat 5
"""
import argparse
import timeit

import numpy as np

from qkdlab import _kernels as K


def make_inputs(n, seed=0):
    rng = np.random.default_rng(seed)
    counts = rng.poisson(0.5, n).astype(np.int64)
    return {
        "pns_actions": (counts, rng.random(n), 0.3, 0.0),
        "interferometer": (rng.random(n), rng.random(n) < 0.5, rng.random(n), rng.random(n)),
        "sift": (rng.integers(0, 4, n, dtype=np.int8), rng.integers(0, 2, n, dtype=np.int8), rng.random(n) < 0.5),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=1_000_000)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if not K.HAVE_NUMBA:
        raise SystemExit("numba is not installed; nothing to compare")

    inputs = make_inputs(args.n)
    print(f"n = {args.n}, best of {args.repeat}")
    print(f"{'kernel':<16}{'numpy ms':>10}{'numba ms':>10}{'speedup':>9}")
    for name, call_args in inputs.items():
        fast = getattr(K, f"{name}_numba")
        slow = getattr(K, f"{name}_numpy")
        fast(*call_args)  # compile outside the timing
        t_np = min(timeit.repeat(lambda: slow(*call_args), number=1, repeat=args.repeat))
        t_nb = min(timeit.repeat(lambda: fast(*call_args), number=1, repeat=args.repeat))
        print(f"{name:<16}{1e3 * t_np:10.2f}{1e3 * t_nb:10.2f}{t_np / t_nb:9.1f}x")


if __name__ == "__main__":
    main()
