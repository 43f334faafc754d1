"""Time the compiled kernels against their numpy twins.

    python3 benchmarks/bench_kernels.py [--repeat 3] [--jacobi-dim 256]

Every case first checks that both backends return identical bytes, then
reports the best wall time of ``--repeat`` runs and the speed-up.
"""

import argparse
import time

import numpy as np

from factorforge import kernels
from factorforge.matcore import JACOBI_MAX_SWEEPS, JACOBI_REL_TOL, round_robin_schedule


def best_time(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def as_bytes(out):
    if isinstance(out, tuple):
        return b"".join(as_bytes(o) for o in out)
    if isinstance(out, np.ndarray):
        return out.tobytes()
    return repr(out).encode()


def cases(jacobi_dim):
    g = np.random.default_rng(0)
    W = g.uniform(-1, 1, (jacobi_dim, jacobi_dim))
    S = W.T @ W
    S = np.triu(S) + np.triu(S, 1).T
    sched = round_robin_schedule(jacobi_dim)
    X = g.standard_normal((1000, 64))
    G = g.standard_normal((2048, 512))
    return [
        ("philox_grid 100000x64", lambda m: m.philox_grid(42, 3, 0, 100_000, 64)),
        ("gram 2048x512", lambda m: m.gram(G)),
        (f"jacobi_eigh n={jacobi_dim}", lambda m: m.jacobi_eigh(S, JACOBI_REL_TOL, JACOBI_MAX_SWEEPS, sched)),
        ("mean_pairwise 1000x64", lambda m: m.mean_pairwise_euclidean(X)),
    ]


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=3)
    parser.add_argument("--jacobi-dim", type=int, default=256)
    args = parser.parse_args()

    backends = kernels.available_backends()
    if "cython" not in backends:
        print("compiled extension not built; only the python backend is available")
    names = [n for n in ("cython", "python") if n in backends]
    header = f"{'kernel':<24}" + "".join(f"{n + ' (s)':>14}" for n in names)
    if len(names) == 2:
        header += f"{'speed-up':>10}{'same bytes':>12}"
    print(header)
    for label, call in cases(args.jacobi_dim):
        row = {}
        for n in names:
            row[n] = best_time(lambda: call(backends[n]), args.repeat)
        line = f"{label:<24}" + "".join(f"{row[n][0]:>14.4f}" for n in names)
        if len(names) == 2:
            same = as_bytes(row["cython"][1]) == as_bytes(row["python"][1])
            line += f"{row['python'][0] / row['cython'][0]:>9.1f}x{str(same):>12}"
        print(line)


if __name__ == "__main__":
    main()
