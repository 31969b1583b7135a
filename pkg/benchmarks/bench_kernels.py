#!/usr/bin/env python3
"""Numba vs pure-numpy timings for the hot kernels.

Both backends are called through ``kernels.impl`` on identical inputs, and
their outputs are compared before any timing is reported. Prints JSON.
"""

import argparse
import json
import platform
import sys
import time

import numpy as np

from threshold_lab import kernels
from threshold_lab.cover import TIE_EPS

SEED = 42


def timed(func, args, warmup, runs):
    for _ in range(warmup):
        out = func(*args)
    times = []
    for _ in range(runs):
        start = time.perf_counter()
        out = func(*args)
        times.append(time.perf_counter() - start)
    return out, {"min": min(times), "mean": sum(times) / len(times), "runs": times}


def random_members(rng, n, count, max_size):
    out = set()
    while len(out) < count:
        size = int(rng.integers(1, max_size + 1))
        out.add(int(sum(1 << int(x) for x in rng.choice(n, size=size, replace=False))))
    return np.array(sorted(out), dtype=np.int64)


def dp_inputs(rng, h, pool):
    cov = rng.integers(1, 1 << h, size=pool, dtype=np.int64)
    cov[:h] = 1 << np.arange(h)  # every target coverable
    cost = rng.uniform(0.01, 1.0, pool)
    ptr = [0]
    idx = []
    for i in range(h):
        idx.extend(np.flatnonzero(cov >> i & 1).tolist())
        ptr.append(len(idx))
    return h, cov, cost, np.array(ptr, dtype=np.int64), np.array(idx, dtype=np.int64), TIE_EPS


def cases(rng, scale):
    n = 14 + scale
    members = random_members(rng, n, 40, 4)
    p = rng.uniform(0.05, 0.95, n)
    trials = 200_000 * (scale + 1)
    uniforms = rng.random((trials, n))
    samples = kernels.impl("pack_masks", "numpy")(uniforms, p)
    return {
        "minimal": (random_members(rng, 20, 3000, 6),),
        "outcome_weights": (p,),
        "prob_upset": (members, p),
        "pack_masks": (uniforms, p),
        "upset_hits": (samples, members),
        "cover_dp": dp_inputs(rng, 14 + scale, 400),
    }


def same(a, b):
    if isinstance(a, tuple):
        return all(same(x, y) for x, y in zip(a, b))
    if isinstance(a, np.ndarray):
        return a.shape == b.shape and np.allclose(a, b, rtol=1e-12, atol=1e-15)
    return abs(a - b) <= 1e-12


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--scale", type=int, default=0, help="grow every input (n, trials, DP width)")
    parser.add_argument("--warmup", type=int, default=2)
    parser.add_argument("--runs", type=int, default=5)
    parser.add_argument("--only", nargs="*", help="subset of kernel names")
    parser.add_argument("-o", "--output", help="write JSON here instead of stdout")
    args = parser.parse_args()

    rng = np.random.default_rng(SEED)
    results = {}
    for name, inputs in cases(rng, args.scale).items():
        if args.only and name not in args.only:
            continue
        out_nb, t_nb = timed(kernels.impl(name, "numba"), inputs, args.warmup, args.runs)
        out_np, t_np = timed(kernels.impl(name, "numpy"), inputs, args.warmup, args.runs)
        results[name] = {
            "numba": t_nb,
            "numpy": t_np,
            "speedup": t_np["min"] / t_nb["min"] if t_nb["min"] > 0 else None,
            "outputs_match": bool(same(out_nb, out_np)),
        }
        print(f"{name:16s} numba {t_nb['min'] * 1e3:9.3f} ms  numpy {t_np['min'] * 1e3:9.3f} ms",
              file=sys.stderr)

    report = {
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scale": args.scale,
        "seed": SEED,
        "kernels": results,
    }
    text = json.dumps(report, indent=2)
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return 0 if all(r["outputs_match"] for r in results.values()) else 1


if __name__ == "__main__":
    sys.exit(main())
