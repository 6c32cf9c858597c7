"""Time the compiled kernels against the pure-Python fallback.

    python3 benchmarks/bench_backends.py [--n 2000 --k 100 --c 5 --reps 20]

Both backends get identical inputs; the script also checks that their
outputs agree bit for bit before reporting timings.
"""
import argparse
import timeit

import numpy as np

from pushwalk import _backend, _fallback
from pushwalk.model import step_cdf_table, step_table


def propagate_case(mod, n, k, c):
    def run():
        dist = np.zeros(n - k + 1)
        dist[0] = 1.0
        mod.propagate(dist, step_table(n, c), k, k, 0, 0, -1)
        return dist
    return run


def push_case(mod, n, k, c, reps):
    cdf = step_cdf_table(n, c)
    levels = np.array([n - k], dtype=np.int64)
    nu_levels = np.array([n], dtype=np.int64)

    def run():
        out = []
        for r in range(reps):
            tau = np.full(1, -1, dtype=np.int64)
            nu = np.full(1, -1, dtype=np.int64)
            traj = np.zeros(2, dtype=np.int64)
            mod.push_replication(n, k, cdf, np.random.PCG64(r), levels, tau, nu_levels, nu, traj, 10_000)
            out.append((int(tau[0]), int(nu[0])))
        return out
    return run


def best_of(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--n", type=int, default=2000)
    parser.add_argument("--k", type=int, default=100)
    parser.add_argument("--c", type=int, default=5)
    parser.add_argument("--reps", type=int, default=20, help="replications per push timing")
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()

    compiled = _backend.compiled
    if compiled is None:
        raise SystemExit("compiled extension not available; rebuild with `pip install --no-build-isolation -e .`")
    # build the cached tables outside the timed region
    step_table(args.n, args.c)
    step_cdf_table(args.n, args.c)

    cases = [
        (f"propagate n={args.n} k={args.k} c={args.c} ({args.k} steps)",
         propagate_case(compiled, args.n, args.k, args.c), propagate_case(_fallback, args.n, args.k, args.c)),
        (f"push_replication to full infection x{args.reps}",
         push_case(compiled, args.n, args.k, args.c, args.reps), push_case(_fallback, args.n, args.k, args.c, args.reps)),
    ]
    print(f"{'kernel':<52} {'compiled':>11} {'python':>11} {'speedup':>8}")
    for name, fast, slow in cases:
        a, b = fast(), slow()
        same = a.tobytes() == b.tobytes() if isinstance(a, np.ndarray) else a == b
        if not same:
            raise SystemExit(f"{name}: backends disagree")
        t_fast = best_of(fast, args.repeat)
        t_slow = best_of(slow, args.repeat)
        print(f"{name:<52} {t_fast * 1e3:>9.2f}ms {t_slow * 1e3:>9.2f}ms {t_slow / t_fast:>7.0f}x")


if __name__ == "__main__":
    main()
