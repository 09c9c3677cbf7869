"""Compare the compiled kernels with the pure-Python fallback.

    python3 benchmarks/bench_kernels.py [--repeat N]
"""
import argparse
import timeit

import numpy as np

from listident import kernels


def cases(rng):
    stream = rng.integers(0, 4, size=200_000)
    ident = (rng.random(1 << 16) < 0.8).astype(np.uint8)
    members = list(range(14))
    needs = [int(m) for m in rng.integers(1, 1 << 14, size=40)]
    return {
        "rank_exclusion": lambda k: [k.rank_exclusion([2, 9, 30], 3) for _ in range(2000)],
        "unrank_exclusion": lambda k: [k.unrank_exclusion(i, 3) for i in range(1, 2001)],
        "min_hitting_subset": lambda k: k.min_hitting_subset(members, needs, 6),
        "extract_pair_bits": lambda k: k.extract_pair_bits(stream, 10 ** 6),
        "run_counts": lambda k: k.run_counts(ident, 16),
    }


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    mods = kernels.backends()
    if "cython" not in mods:
        print("compiled kernels not built; only the Python backend is available")
    print(f"{'kernel':<20}" + "".join(f"{name:>12}" for name in mods) + f"{'speedup':>10}")
    for name, fn in cases(np.random.default_rng(0)).items():
        times = {}
        for backend, mod in mods.items():
            times[backend] = min(timeit.repeat(lambda: fn(mod), number=1, repeat=args.repeat))
        row = f"{name:<20}" + "".join(f"{times[b] * 1e3:>10.2f}ms" for b in mods)
        if "cython" in times:
            row += f"{times['python'] / times['cython']:>9.1f}x"
        print(row)


if __name__ == "__main__":
    main()
