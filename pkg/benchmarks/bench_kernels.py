"""Compare the numba kernels against their numpy fallbacks.

    python benchmarks/bench_kernels.py [--reps N]

Both paths are timed in the same process (the ``*_jit`` and ``*_numpy``
names are always importable), after one warm-up call each so JIT
compilation is excluded.  Results are checked for agreement before timing.
"""

import argparse
import random
import statistics
import time

import numpy as np

from fanfire import _kernels
from fanfire.symmetry import SignedPermutation, close


def hyperoctahedral(m: int):
    """Signed permutations generated by a transposition, an m-cycle and one sign flip."""
    gens = [
        SignedPermutation.from_cycles(m, [(0, 1)]),
        SignedPermutation.from_cycles(m, [tuple(range(m))]),
        SignedPermutation(tuple(range(m)), (-1,) + (1,) * (m - 1)),
    ]
    return close(gens, m, cap=10**6)


def best_of(fn, reps: int) -> float:
    times = []
    for _ in range(reps):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def bench_orbits(m: int, reps: int, n_vectors: int = 50):
    G = hyperoctahedral(m)
    sigma, eps = G.arrays()
    rng = random.Random(m)
    vecs = [np.array([rng.choice((-1, 0, 1)) for _ in range(m)], dtype=np.int8) for _ in range(n_vectors)]
    rows = []
    for name, jit_fn, np_fn in (
        ("lexmin", _kernels.lexmin_jit, _kernels.lexmin_numpy),
        ("orbit_count", _kernels.orbit_count_jit, _kernels.orbit_count_numpy),
    ):
        for v in vecs:
            a, b = jit_fn(sigma, eps, v), np_fn(sigma, eps, v)
            assert np.array_equal(np.asarray(a), np.asarray(b)), (name, v)
        t_jit = best_of(lambda: [jit_fn(sigma, eps, v) for v in vecs], reps)
        t_np = best_of(lambda: [np_fn(sigma, eps, v) for v in vecs], reps)
        rows.append((f"{name} m={m} |G|={len(G)}", t_jit, t_np))
    return rows


def bench_spin(ms: float, reps: int):
    rows = []
    for label, kernel in (("jit", _kernels.spin_jit), ("numpy", _kernels.spin_numpy)):
        rate = _kernels.iterations_per_ms(kernel)
        wall = best_of(lambda: _kernels.busy_wait(ms, kernel=kernel), reps)
        rows.append((label, rate, wall))
    return rows


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--reps", type=int, default=5)
    args = ap.parse_args()

    print(f"numba available: {_kernels.numba is not None}, active path: {'jit' if _kernels.USE_JIT else 'numpy'}")
    print()
    print(f"{'kernel':36s} {'jit (ms)':>10s} {'numpy (ms)':>11s} {'ratio':>7s}")
    for m in (3, 4, 5):
        for label, t_jit, t_np in bench_orbits(m, args.reps):
            print(f"{label:36s} {t_jit * 1e3:10.3f} {t_np * 1e3:11.3f} {t_np / t_jit:6.1f}x")
    print()
    print("busy_wait(10 ms): calibrated rate and measured wall time")
    spin = bench_spin(10.0, args.reps)
    for label, rate, wall in spin:
        print(f"  {label:6s} {rate:14.0f} iter/ms  wall {wall * 1e3:6.2f} ms")
    print(f"  throughput ratio jit/numpy: {spin[0][1] / spin[1][1]:.1f}x")
    print(f"  wall spread: {statistics.pstdev([w for _, _, w in spin]) * 1e3:.2f} ms")


if __name__ == "__main__":
    main()
