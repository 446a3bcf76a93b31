"""Time matrix closure on the compiled kernels, the numpy fallback and the generic path.

    python benchmarks/bench_closure.py [--sizes 16 64 128] [--repeat 3]
"""

import argparse
import random
import time

from qsec import kernels
from qsec.generate import random_weight
from qsec.semiring import FUZZY, TROPICAL, matrix_closure


def random_matrix(rng, spec, n, density=0.2):
    return [[random_weight(rng, spec) if rng.random() < density else spec.bot for _ in range(n)] for _ in range(n)]


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        times.append(time.perf_counter() - start)
    return min(times)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sizes", type=int, nargs="+", default=[16, 64, 128])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    rng = random.Random(args.seed)
    backends = ["python"] + (["compiled"] if kernels.BACKEND == "compiled" else [])
    print(f"{'semiring':<10} {'n':>5} {'generic':>10} " + " ".join(f"{b:>10}" for b in backends))
    for spec in (TROPICAL, FUZZY):
        for n in args.sizes:
            m = random_matrix(rng, spec, n)
            ref = matrix_closure(m, spec, backend="python")
            row = [best_of(lambda: matrix_closure(m, spec, backend="python"), args.repeat)]
            for b in backends:
                assert kernels.closure(m, spec, force=True, backend=b) == ref
                row.append(best_of(lambda b=b: kernels.closure(m, spec, force=True, backend=b), args.repeat))
            print(f"{spec.name:<10} {n:>5} " + " ".join(f"{t * 1000:>8.2f}ms" for t in row))
    print("('python' is the numpy fallback; 'generic' is the object-level path)")


if __name__ == "__main__":
    main()
