#!/usr/bin/env python3
"""Benchmark the compiled propagation kernel against the numpy fallback.

Times propagate_slabs on representative workloads (one degenerate and one
split-line target) for both backends and reports the speedup and the
largest deviation between their outputs.

    python benchmarks/kernel_benchmark.py [--nt 4096] [--nz 32] [--repeats 5]
"""

import argparse
import time

import numpy as np

from gammaecho import kernels


def make_case(nt: int, rng) -> dict:
    t = 0.05 * np.arange(nt)
    omega = np.exp(-(((t - 30.0) / 5.0) ** 2)).astype(complex)
    gamma = 1.0 / 141.1
    detuning_up = gamma * (50.0 + 25.0 * np.tanh((t[:-1] - 60.0) / 25.0))
    detuning_lo = gamma * (-50.0 + 25.0 * np.tanh((t[:-1] - 60.0) / 25.0))
    dt = float(t[1] - t[0])
    return {
        "omega": omega,
        "e_up": np.exp(-(0.5 * gamma + 1j * detuning_up) * dt),
        "e_lo": np.exp(-(0.5 * gamma + 1j * detuning_lo) * dt),
        "src": 6.0 * gamma * 11.2 * np.sqrt(2.0 / 3.0),
        "drv": 0.25 * np.sqrt(2.0 / 3.0),
        "dt": dt,
    }


def run_backend(impl, case, nz, e_lo):
    return impl.propagate_slabs(
        case["omega"], case["e_up"], e_lo, case["src"], case["drv"], case["dt"], nz
    )


def time_backend(impl, case, nz, e_lo, repeats):
    best = float("inf")
    out = None
    for _ in range(repeats):
        start = time.perf_counter()
        out = run_backend(impl, case, nz, e_lo)
        best = min(best, time.perf_counter() - start)
    return best, out


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--nt", type=int, default=4096, help="time samples")
    ap.add_argument("--nz", type=int, default=32, help="slabs per target")
    ap.add_argument("--repeats", type=int, default=5, help="timing repetitions")
    args = ap.parse_args()

    backends = {}
    for name in ("numpy", "cython"):
        try:
            backends[name] = kernels.load_backend(name)
        except ImportError:
            print(f"{name:>8s}: not available")
    case = make_case(args.nt, np.random.default_rng(0))

    print(f"workload: nt={args.nt}, nz={args.nz}, complex128")
    for label, e_lo in (("degenerate lines", None), ("split lines", case["e_lo"])):
        print(f"\n{label}:")
        results = {}
        for name, impl in backends.items():
            elapsed, out = time_backend(impl, case, args.nz, e_lo, args.repeats)
            results[name] = (elapsed, out)
            print(f"  {name:>8s}: {elapsed * 1e3:8.2f} ms")
        if len(results) == 2:
            t_np, out_np = results["numpy"]
            t_cy, out_cy = results["cython"]
            dev = float(np.abs(out_np - out_cy).max())
            print(f"  speedup : {t_np / t_cy:8.2f}x (cython over numpy)")
            print(f"  max |difference|: {dev:.3e}")


if __name__ == "__main__":
    main()
