"""Time the numba kernels against their numpy counterparts.

    python benchmarks/bench_kernels.py [--repeat 5]

Both paths are called directly, so the env switch does not matter here.
The first numba call (compilation or cache load) is excluded.
"""

import argparse
import time

import numpy as np

from spinbath import _kernels
from spinbath.correlations import enumerate_configurations
from spinbath.model import validate_spec


def best_of(func, args, repeat):
    func(*args)  # warm-up / compile
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        func(*args)
        times.append(time.perf_counter() - t0)
    return min(times)


def cases():
    rng = np.random.default_rng(0)
    g = rng.uniform(-1, 1, 100)
    b = np.tanh(-0.5 * rng.uniform(-1, 1, 100))
    tau = np.geomspace(1e-2, 10, 4000)
    yield "coherence_product N=100 T=4000", (
        _kernels.coherence_product_numba, _kernels.coherence_product_numpy, (g, b, float(g @ b), tau))

    n = 14
    spec = validate_spec({"n_spins": n, "couplings": rng.uniform(-1, 1, n),
                          "frequencies": rng.uniform(-1, 1, n), "beta": 1.0, "alpha": 1.0})
    shifted, lam = enumerate_configurations(spec)
    t_short = np.geomspace(1e-2, 10, 200)
    yield "kraus_sum N=14 T=200", (_kernels.kraus_sum_numba, _kernels.kraus_sum_numpy, (shifted, lam, t_short))

    g2 = rng.uniform(-1, 1, 2000)
    b2 = np.tanh(-0.5 * rng.uniform(-1, 1, 2000))
    yield "sum_central_moments N=2000 k<=8", (
        _kernels.sum_central_moments_numba, _kernels.sum_central_moments_numpy, (g2, b2, 8))


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()

    print(f"{'kernel':36s} {'numba [ms]':>11s} {'numpy [ms]':>11s} {'speedup':>8s}  max |diff|")
    for name, (fast, slow, fargs) in cases():
        t_fast = best_of(fast, fargs, args.repeat)
        t_slow = best_of(slow, fargs, args.repeat)
        diff = np.max(np.abs(np.asarray(fast(*fargs)) - np.asarray(slow(*fargs))))
        print(f"{name:36s} {1e3 * t_fast:11.3f} {1e3 * t_slow:11.3f} {t_slow / t_fast:8.2f}  {diff:.2e}")


if __name__ == "__main__":
    main()
