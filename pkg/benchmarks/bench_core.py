"""Benchmark the numerical hot kernels: compiled backend vs pure numpy.

Usage:
    python3 benchmarks/bench_core.py [--sizes 2 3 5 8] [--repeat 5] [--json]

Each kernel is timed per call (best of ``--repeat`` batches) for every
problem size, for every available backend.  The summary table reports
the speedup of the compiled extension over the fallback when both are
present.
"""

import argparse
import json
import sys
import timeit

import numpy as np

from relaxls._core import available_backends, get_backend


def make_inputs(p, rng):
    A = rng.normal(size=(p, p))
    F = np.eye(p) + 0.1 * A @ A.T
    eta = rng.normal(size=p)
    eta0 = rng.normal(size=p)
    phi = rng.normal(size=p)
    g_theta = rng.normal(size=p)
    Q = np.eye(p)
    return {
        "adj_det": (A,),
        "sym_eigmax": (F,),
        "ct_rates": (eta, F, 0.5, phi, 1.0, g_theta, eta0,
                     20.0, 4.0, 0.07, 25.0, 700.0, Q),
        "dt_ls_update": (eta, F, phi, 1.0, 0.96),
    }


def bench_kernel(fn, args, repeat, number):
    timer = timeit.Timer(lambda: fn(*args))
    return min(timer.repeat(repeat, number)) / number


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", type=int, nargs="+", default=[2, 3, 5, 8])
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--number", type=int, default=2000,
                        help="calls per timing batch")
    parser.add_argument("--json", action="store_true",
                        help="emit machine-readable results")
    args = parser.parse_args(argv)

    rng = np.random.default_rng(0)
    backends = available_backends()
    results = []
    for p in args.sizes:
        inputs = make_inputs(p, rng)
        for kernel, call_args in inputs.items():
            row = {"kernel": kernel, "p": p}
            for name in backends:
                fn = getattr(get_backend(name), kernel)
                row[name] = bench_kernel(fn, call_args, args.repeat,
                                         args.number)
            results.append(row)

    if args.json:
        json.dump(results, sys.stdout, indent=2)
        print()
        return 0

    have_both = "speedups" in backends and "fallback" in backends
    header = f"{'kernel':<14} {'p':>3}"
    for name in backends:
        header += f" {name + ' (us)':>15}"
    if have_both:
        header += f" {'speedup':>8}"
    print(header)
    print("-" * len(header))
    for row in results:
        line = f"{row['kernel']:<14} {row['p']:>3}"
        for name in backends:
            line += f" {row[name] * 1e6:>15.2f}"
        if have_both:
            line += f" {row['fallback'] / row['speedups']:>7.2f}x"
        print(line)
    if not have_both:
        print("\ncompiled extension not available; fallback only")
    return 0


if __name__ == "__main__":
    sys.exit(main())
