"""Time the compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat 5]

Prints one line per kernel with the best-of-``repeat`` time of each backend
and checks that both return identical arrays.
"""

from __future__ import annotations

import argparse
import sys
import timeit

import numpy as np

from evoflow import _pykernels

try:
    from evoflow import _ckernels
except ImportError:
    _ckernels = None


def cases(rng: np.random.Generator):
    a, b = rng.standard_normal((128, 96)), rng.standard_normal((96, 128))
    s = rng.standard_normal((32, 32))
    s = (s + s.T) / 2
    fit = rng.random((400, 3))
    return {
        "random_bits n=1e6": lambda k: k.random_bits(0x2DA5AB9764EA3C24, 0x63CBE1E459320DD7, 0, 1_000_000),
        "matmul 128x96x128": lambda k: k.matmul(a, b),
        "jacobi_eig 32x32": lambda k: k.jacobi_eig(s, 100, 1e-15),
        "nd_rank P=400 M=3": lambda k: k.nd_rank(fit),
    }


def same(x, y) -> bool:
    if isinstance(x, tuple):
        return all(same(p, q) for p, q in zip(x, y))
    return np.array_equal(np.asarray(x), np.asarray(y))


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args(argv)
    if _ckernels is None:
        print("compiled kernels not built; run `pip install -e . --no-build-isolation` first", file=sys.stderr)
        return 1
    print(f"{'kernel':22s} {'numpy ms':>10s} {'compiled ms':>12s} {'speedup':>8s}  identical")
    for name, fn in cases(np.random.default_rng(0)).items():
        py = min(timeit.repeat(lambda: fn(_pykernels), number=1, repeat=args.repeat)) * 1e3
        c = min(timeit.repeat(lambda: fn(_ckernels), number=1, repeat=args.repeat)) * 1e3
        print(f"{name:22s} {py:10.3f} {c:12.3f} {py / c:7.1f}x  {same(fn(_pykernels), fn(_ckernels))}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
