"""Compare the compiled and pure-Python subset-scan kernels.

    python3 benchmarks/bench_kernels.py [--max-n 14] [--repeat 3]
"""
import argparse
import random
import timeit

from byzavg import _pykernels
from byzavg.digraph import complete
from byzavg.search import random_digraph

try:
    from byzavg import _ckernels
except ImportError:
    _ckernels = None


def cases(max_n):
    rng = random.Random(1)
    for n in range(6, max_n + 1, 2):
        yield f"strong audit K{n}", n, lambda k, g=complete(n), n=n: k.strong_robust_scan(n, g.in_masks(), -(-n // 2), False)
        g = random_digraph(n, 0.7, rng)
        yield f"r-robust rand{n}", n, lambda k, g=g, n=n: k.r_robust_scan(n, g.in_masks(), 2)
    for n in range(4, min(max_n, 10) + 1, 2):
        yield f"resilient audit K{n}", n, lambda k, g=complete(n), n=n: k.f_resilient_scan(n, g.in_masks(), 1, False)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--max-n", type=int, default=12)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    print(f"{'case':<22}{'python s':>12}{'cython s':>12}{'speedup':>10}")
    for name, n, fn in cases(args.max_n):
        py = min(timeit.repeat(lambda: fn(_pykernels), number=1, repeat=args.repeat))
        if _ckernels is None:
            print(f"{name:<22}{py:>12.4f}{'n/a':>12}{'':>10}")
            continue
        cy = min(timeit.repeat(lambda: fn(_ckernels), number=1, repeat=args.repeat))
        assert fn(_pykernels) == fn(_ckernels), name
        print(f"{name:<22}{py:>12.4f}{cy:>12.4f}{py / cy:>9.1f}x")


if __name__ == "__main__":
    main()
