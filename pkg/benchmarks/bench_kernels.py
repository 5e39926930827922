"""Compare the compiled and pure-Python kernel backends.

Usage: python benchmarks/bench_kernels.py [--limit N] [--repeat R]
"""

from __future__ import annotations

import argparse
import timeit

import numpy as np

from arithqsm import kernels
from arithqsm.arith_core import primes_up_to, smallest_prime_factors


def _ddf_case(limit: int):
    f = [-3] + [0] * 7 + [1]
    ps = [int(p) for p in primes_up_to(limit) if p > 3]
    return lambda impl: [impl.ddf_pattern(f, p) for p in ps]


def _convolve_case(limit: int):
    rng = np.random.default_rng(1)
    u = rng.integers(-5, 6, size=limit + 1, dtype=np.int64)
    v = rng.integers(-5, 6, size=limit + 1, dtype=np.int64)
    return lambda impl: impl.dirichlet_convolve(u, v)


def _assemble_case(limit: int):
    spf = smallest_prime_factors(limit)
    offsets = np.full(limit + 1, -1, dtype=np.int64)
    local = []
    for p in primes_up_to(limit):
        offsets[p] = len(local)
        local.extend([1] + [2] * 24)
    local = np.array(local, dtype=np.int64)
    return lambda impl: impl.assemble_multiplicative(spf, offsets, local)


CASES = {"ddf_pattern": _ddf_case, "dirichlet_convolve": _convolve_case, "assemble_multiplicative": _assemble_case}


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--limit", type=int, default=200_000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    backends = kernels.available_backends()
    print(f"limit={args.limit} repeat={args.repeat} backends={','.join(backends)}")
    print(f"{'kernel':<26}" + "".join(f"{b:>12}" for b in backends) + f"{'speedup':>10}")
    for name, make in CASES.items():
        run = make(args.limit)
        times = {}
        for b in backends:
            impl = kernels.load_backend(b)
            times[b] = min(timeit.repeat(lambda: run(impl), number=1, repeat=args.repeat))
        speed = f"{times['python'] / times['cython']:.1f}x" if "cython" in times else "n/a"
        print(f"{name:<26}" + "".join(f"{times[b]:>11.4f}s" for b in backends) + f"{speed:>10}")


if __name__ == "__main__":
    main()
