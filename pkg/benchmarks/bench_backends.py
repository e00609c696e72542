"""Compare the compiled and pure-Python 2-hop kernels on the same graphs.

    python benchmarks/bench_backends.py --n 2000 5000 --pairs 20000

Labels are checked to be identical before timings are reported.
"""
from __future__ import annotations

import argparse
import math
import platform
import time

import numpy as np

from kwgraph import hop2
from kwgraph.generators import preferential_attachment


def timed(fn, *args):
    t0 = time.perf_counter()
    out = fn(*args)
    return out, time.perf_counter() - t0


def bench(n: int, pairs: int, mult: float, seed: int) -> list[dict]:
    rng = np.random.default_rng(seed)
    g = preferential_attachment(n, 2, rng)
    d_max = mult * g.mean_edge_weight()
    src = rng.integers(0, n, pairs).astype(np.int32)
    dst = rng.integers(0, n, pairs).astype(np.int32)
    rows, built = [], {}
    for backend in sorted(hop2.available_backends()):
        ix, build_s = timed(hop2.build, g, d_max, backend)
        built[backend] = ix
        _, dist_s = timed(ix.distance_pairs, src, dst)
        k = min(pairs, 2000)
        _, path_s = timed(ix.path_batch, src[:k], dst[:k])
        rows.append({"n": n, "backend": backend, "entries": ix.stats().entries,
                     "build_s": build_s, "dist_us": 1e6 * dist_s / pairs,
                     "path_us": 1e6 * path_s / k})
    if len(built) == 2:
        a, b = built.values()
        assert np.array_equal(a.hubs, b.hubs) and np.array_equal(a.dists, b.dists)
    return rows


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, nargs="+", default=[1000, 3000])
    ap.add_argument("--pairs", type=int, default=20000)
    ap.add_argument("--dmax", type=float, default=10.0, help="multiple of the mean edge weight")
    ap.add_argument("--seed", type=int, default=42)
    args = ap.parse_args()
    mult = math.inf if args.dmax <= 0 else args.dmax
    print(f"# {platform.platform()} | python {platform.python_version()}")
    print(f"{'n':>7} {'backend':>9} {'entries':>10} {'build_s':>9} {'dist_us':>9} {'path_us':>9}")
    speed = {}
    for n in args.n:
        for r in bench(n, args.pairs, mult, args.seed):
            speed.setdefault(n, {})[r["backend"]] = r
            print(f"{r['n']:>7} {r['backend']:>9} {r['entries']:>10} {r['build_s']:>9.3f} "
                  f"{r['dist_us']:>9.3f} {r['path_us']:>9.3f}")
    for n, by in speed.items():
        if len(by) == 2:
            c, p = by["compiled"], by["python"]
            print(f"# n={n}: compiled speedup build x{p['build_s'] / c['build_s']:.1f}, "
                  f"distance x{p['dist_us'] / c['dist_us']:.1f}, path x{p['path_us'] / c['path_us']:.1f}")


if __name__ == "__main__":
    main()
