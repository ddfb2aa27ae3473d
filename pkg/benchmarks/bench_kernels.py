"""Time each compiled kernel against its plain-Python body.

    python3 benchmarks/bench_kernels.py [--repeat 5]

The pure path is the ``py_func`` attribute numba keeps on every compiled
function, i.e. exactly what runs when INRADIUS_ELASTICA_JIT=0.
"""

import argparse
import math
import timeit

import numpy as np

from inradius_elastica import _kernels as K


def cases():
    rng = np.random.default_rng(0)
    t = np.linspace(0, 2 * math.pi, 4000, endpoint=False)
    poly = np.column_stack([2 * np.cos(t), np.sin(t)])
    return {
        "pav_nondecreasing (n=20000)": (K.pav_nondecreasing, (rng.normal(size=20_000),)),
        "caliper_diameter (n=4000)": (K.caliper_diameter, (poly,)),
        "welzl_circle (n=4000)": (K.welzl_circle, (rng.permutation(poly),)),
        "rk4_pendulum (L=4)": (K.rk4_pendulum, (1.2, 0.5, math.pi, 4.0, 1e-10, 200_000)),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    if not K.JIT_ENABLED:
        print("JIT disabled (numba missing or INRADIUS_ELASTICA_JIT=0); nothing to compare")
        return 0
    print(f"{'kernel':32s} {'jit ms':>10s} {'python ms':>10s} {'speedup':>8s}")
    for name, (fn, a) in cases().items():
        fn(*a)  # compile outside the timed region
        jit = min(timeit.repeat(lambda: fn(*a), number=1, repeat=args.repeat))
        py = min(timeit.repeat(lambda: fn.py_func(*a), number=1, repeat=max(1, args.repeat // 2)))
        print(f"{name:32s} {jit * 1e3:10.3f} {py * 1e3:10.3f} {py / jit:8.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
