"""Time the numba kernels against their numpy counterparts.

Usage::

    python benchmarks/bench_backends.py [--repeat 5] [--skip-end-to-end]

Part one calls both flavours of every kernel in-process on the same inputs
(compilation is excluded by a warm-up call).  Part two runs one small
``markovdens bench`` cell in a subprocess per backend, with
``MARKOVDENS_DISABLE_JIT=1`` selecting numpy, so import and JIT start-up
are included as a user would see them.
"""

import argparse
import os
import subprocess
import sys
import tempfile
import time
import timeit

import numpy as np

from markovdens import kernels


def best_of(func, repeat):
    func()  # warm-up, triggers compilation
    return min(timeit.repeat(func, number=1, repeat=repeat))


def kernel_cases(n):
    rng = np.random.default_rng(0)
    z1 = rng.standard_normal(n)
    z3 = rng.standard_normal((n, 3))
    xi0 = rng.standard_normal(3)
    grid = np.linspace(0.0, 60.0, n)
    return {
        f"ar path (n={n})": lambda k: getattr(kernels, f"ar_path_{k}")(0.0, 2 / 3, 0.0, 0.745, z1),
        f"radial OU path (n={n}, delta=3)": lambda k: getattr(kernels, f"radial_ou_path_{k}")(
            xi0, 0.5, 3.0, z3),
        f"arch path (n={n})": lambda k: getattr(kernels, f"arch_path_{k}")(0.0, z1),
        f"scaled Bessel I_0.5 ({n} points)": lambda k: getattr(kernels, f"bessel_ive_{k}")(
            0.5, grid),
    }


def end_to_end(replications):
    times = {}
    with tempfile.TemporaryDirectory() as tmp:
        for backend, flag in (("numba", "0"), ("numpy", "1")):
            env = dict(os.environ, MARKOVDENS_DISABLE_JIT=flag)
            cmd = [sys.executable, "-m", "markovdens.cli", "bench", "--chains", "sqrtcir, arch",
                   "--families", "hist", "--sizes", "1000", "-N", str(replications),
                   "--out", os.path.join(tmp, backend)]
            start = time.perf_counter()
            subprocess.run(cmd, env=env, check=True, capture_output=True)
            times[backend] = time.perf_counter() - start
    return times


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--n", type=int, default=100_000)
    parser.add_argument("--replications", type=int, default=20)
    parser.add_argument("--skip-end-to-end", action="store_true")
    args = parser.parse_args()

    if not kernels.NUMBA_AVAILABLE:
        sys.exit("numba is not installed; nothing to compare")
    print(f"{'kernel':<36}{'numba [ms]':>12}{'numpy [ms]':>12}{'speed-up':>10}")
    for name, call in kernel_cases(args.n).items():
        t_jit = best_of(lambda: call("numba"), args.repeat)
        t_np = best_of(lambda: call("numpy"), args.repeat)
        print(f"{name:<36}{1e3 * t_jit:>12.2f}{1e3 * t_np:>12.2f}{t_np / t_jit:>10.1f}")

    if not args.skip_end_to_end:
        times = end_to_end(args.replications)
        print(f"\nbench sqrtcir+arch, hist, n=1000, N={args.replications} (wall clock, subprocess)")
        for backend, t in times.items():
            print(f"  {backend:<6} {t:8.2f} s")


if __name__ == "__main__":
    main()
