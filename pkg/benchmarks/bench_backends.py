#!/usr/bin/env python3
"""Compare the numba and pure-numpy volume kernels on the training hot path.

The dominant cost of the re-weighting stage is recomputing every class's
log-det volume over the feature pool at each iteration. This script times
that exact workload (an imbalance report over a pooled 64-dim feature set)
plus the raw kernel, once per backend, by re-running itself with
SEMSCALE_BACKEND set.

Usage: python benchmarks/bench_backends.py [--classes 10] [--rows 500]
       [--dim 64] [--repeats 50]
"""

import argparse
import json
import os
import subprocess
import sys
import time


def run_worker(args):
    import numpy as np

    import semscale
    from semscale.geometry import LabeledFeatureSet, feature_volume
    from semscale.imbalance import imbalance_report

    rng = np.random.default_rng(0)
    values = rng.normal(size=(args.dim, args.classes * args.rows))
    labels = np.repeat(np.arange(args.classes), args.rows)
    dataset = LabeledFeatureSet(values, labels)

    # warm-up: triggers jit compilation on the numba backend
    imbalance_report(dataset)
    single = dataset.class_matrix(0)
    feature_volume(single)

    t0 = time.perf_counter()
    for _ in range(args.repeats):
        imbalance_report(dataset)
    report_s = (time.perf_counter() - t0) / args.repeats

    t0 = time.perf_counter()
    for _ in range(args.repeats * args.classes):
        feature_volume(single)
    kernel_s = (time.perf_counter() - t0) / (args.repeats * args.classes)

    print(json.dumps({
        "backend": semscale.active_backend(),
        "report_ms": report_s * 1e3,
        "kernel_us": kernel_s * 1e6,
    }))


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--classes", type=int, default=10)
    parser.add_argument("--rows", type=int, default=500, help="pool rows per class")
    parser.add_argument("--dim", type=int, default=64)
    parser.add_argument("--repeats", type=int, default=50)
    parser.add_argument("--worker", action="store_true", help=argparse.SUPPRESS)
    args = parser.parse_args()

    if args.worker:
        run_worker(args)
        return

    results = {}
    for backend in ("numpy", "numba"):
        env = dict(os.environ, SEMSCALE_BACKEND=backend)
        cmd = [sys.executable, os.path.abspath(__file__), "--worker",
               "--classes", str(args.classes), "--rows", str(args.rows),
               "--dim", str(args.dim), "--repeats", str(args.repeats)]
        out = subprocess.run(cmd, env=env, capture_output=True, text=True, check=True)
        results[backend] = json.loads(out.stdout.strip().splitlines()[-1])
        got = results[backend]["backend"]
        if got != backend:
            raise RuntimeError(f"requested backend {backend} but got {got}")

    w = args.classes * args.rows
    print(f"workload: {args.classes} classes x {args.rows} rows, dim {args.dim} "
          f"({w} pooled features), {args.repeats} repeats")
    print(f"{'backend':<8} {'scale report':>14} {'volume kernel':>15}")
    for backend in ("numpy", "numba"):
        r = results[backend]
        print(f"{backend:<8} {r['report_ms']:>11.2f} ms {r['kernel_us']:>12.1f} us")
    ratio = results["numpy"]["report_ms"] / results["numba"]["report_ms"]
    print(f"numba speedup on the report path: {ratio:.2f}x")


if __name__ == "__main__":
    main()
