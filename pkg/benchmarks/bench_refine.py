"""Compare the compiled and pure-Python partition refinement kernels.

    python3 benchmarks/bench_refine.py [--sizes 200 1000 5000] [--repeat 5]

Both kernels run on the same random systems; their block vectors are
checked for equality before timings are reported.
"""

import argparse
import random
import statistics
import time

from mettagraph import _refine_py
from mettagraph import refine


def random_system(n, degree, actions, seed):
    rng = random.Random(seed)
    src, act, dst = [], [], []
    for s in range(n):
        for _ in range(rng.randint(0, 2 * degree)):
            src.append(s)
            act.append(rng.randrange(actions))
            dst.append(rng.randrange(n))
    return src, act, dst


def chain(n):
    # a long a-chain needs n rounds, the worst case for round-based refinement
    return list(range(n - 1)), [0] * (n - 1), list(range(1, n))


def timeit(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return statistics.median(times), out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[200, 1000, 5000])
    ap.add_argument("--chain", type=int, default=400)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)

    if refine.BACKEND != "cython":
        print("compiled kernel not built; only the Python kernel is available")
    cases = [(f"random n={n}", n, random_system(n, 3, 3, n)) for n in args.sizes]
    cases.append((f"chain n={args.chain}", args.chain, chain(args.chain)))

    print(f"{'case':<18}{'python ms':>12}{'cython ms':>12}{'speedup':>10}")
    for name, n, (src, act, dst) in cases:
        tp, hp = timeit(lambda: _refine_py.refine_history(n, src, act, dst), args.repeat)
        if refine.BACKEND == "cython":
            tc, hc = timeit(lambda: refine.refine_history(n, src, act, dst), args.repeat)
            assert hc == hp, f"kernels disagree on {name}"
            print(f"{name:<18}{tp * 1e3:>12.2f}{tc * 1e3:>12.2f}{tp / tc:>9.1f}x")
        else:
            print(f"{name:<18}{tp * 1e3:>12.2f}{'-':>12}{'-':>10}")


if __name__ == "__main__":
    main()
