#!/usr/bin/env python3
"""Benchmark the numba kernels against the pure-numpy fallbacks.

Runs the two hot paths (Monte Carlo sign tally, entropy grid scan) under
the current backend; invoke once normally and once with
``NORMLENS_NO_NUMBA=1`` to compare, or use --both to do that for you:

    python benchmarks/bench_backends.py --both
"""

import argparse
import json
import os
import subprocess
import sys
import time

import numpy as np


def bench_sign_tally(samples: int, dim: int) -> float:
    from normlens import GaussianTokenModel, tally_signs

    model = GaussianTokenModel.shared(1.5, 1.0, dim)
    tally_signs(model, 4096, seed=0)  # warm the JIT / allocator
    start = time.perf_counter()
    tally_signs(model, samples, seed=1)
    return time.perf_counter() - start


def bench_entropy_scan(grid: int) -> float:
    from normlens import elb_bruteforce

    elb_bruteforce(0.5, 4, 16, 51)  # warm
    start = time.perf_counter()
    elb_bruteforce(0.5, 4, 16, grid)
    return time.perf_counter() - start


def run(samples: int, dim: int, grid: int) -> dict:
    from normlens._backend import active_backend

    return {
        "backend": active_backend(),
        "sign_tally_s": bench_sign_tally(samples, dim),
        "entropy_scan_s": bench_entropy_scan(grid),
        "samples": samples,
        "dim": dim,
        "grid": grid,
    }


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--samples", type=int, default=400_000)
    parser.add_argument("--dim", type=int, default=256)
    parser.add_argument("--grid", type=int, default=2001, help="scan grid for L=3")
    parser.add_argument("--both", action="store_true", help="run numba and numpy backends")
    parser.add_argument("--json", action="store_true", help="emit one JSON object")
    args = parser.parse_args()

    if args.both:
        results = []
        for no_numba in ("0", "1"):
            env = dict(os.environ, NORMLENS_NO_NUMBA=no_numba)
            cmd = [
                sys.executable, __file__, "--json",
                "--samples", str(args.samples), "--dim", str(args.dim), "--grid", str(args.grid),
            ]
            out = subprocess.run(cmd, env=env, capture_output=True, text=True, check=True)
            results.append(json.loads(out.stdout))
        print(f"{'backend':>8} | {'sign tally':>12} | {'entropy scan':>12}")
        print("-" * 42)
        for r in results:
            print(f"{r['backend']:>8} | {r['sign_tally_s']:>10.3f} s | {r['entropy_scan_s']:>10.3f} s")
        slow, fast = results[1], results[0]
        if fast["backend"] == "numba":
            print(
                f"speedup: sign tally x{slow['sign_tally_s'] / fast['sign_tally_s']:.1f}, "
                f"entropy scan x{slow['entropy_scan_s'] / fast['entropy_scan_s']:.1f}"
            )
        return

    result = run(args.samples, args.dim, args.grid)
    if args.json:
        print(json.dumps(result))
    else:
        print(
            f"[{result['backend']}] sign tally ({args.samples}x{args.dim}): "
            f"{result['sign_tally_s']:.3f} s | entropy scan (L=3, grid {args.grid}): "
            f"{result['entropy_scan_s']:.3f} s"
        )


if __name__ == "__main__":
    main()
