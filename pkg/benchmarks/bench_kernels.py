"""Compare the compiled and pure-Python kernels.

    python benchmarks/bench_kernels.py [--repeat 5]

Times one parent-sampling sweep over a simulated event sequence and one
Louvain local-move phase over a synthetic story graph, for each backend.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from storyflux import _backend
from storyflux.hawkes import HawkesModel, simulate
from storyflux.storygraph import build_story_graph, prune_edges
from storyflux.synthetic import story_fixture


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--hours", type=float, default=20000.0)
    args = ap.parse_args()

    model = HawkesModel.create([0.2, 0.2, 0.1], [[0.3, 0.2, 0.1], [0.0, 0.3, 0.1], [0.1, 0.1, 0.2]],
                               -2.0, 4.0, 24.0)
    ev = simulate(model, args.hours, seed=0)
    lo, hi = ev.windows(model.dt_max)
    u = np.random.default_rng(1).random(len(ev))
    graph = prune_edges(build_story_graph(story_fixture(n_urls=3000, n_stories=60, seed=0).mentions), 2)
    indptr, indices, data = graph.to_csr()
    n = len(graph.nodes)
    deg = np.bincount(np.repeat(np.arange(n), np.diff(indptr)), weights=data, minlength=n)

    backends = ["pure"] + (["cython"] if _backend.BACKEND == "cython" else [])
    print(f"{len(ev)} events, {n} graph nodes, {len(data) // 2} edges")
    print(f"{'kernel':<16}" + "".join(f"{b:>12}" for b in backends) + ("     speedup" if len(backends) > 1 else ""))
    rows = {
        "sample_parents": lambda b: _backend.sample_parents(ev.times, ev.procs, lo, hi, model.lambda0, model.W,
                                                            model.impulse_mu, model.impulse_tau, model.dt_max,
                                                            u, backend=b),
        "louvain_local": lambda b: _backend.louvain_local(indptr, indices, data, deg, np.arange(n), np.arange(n),
                                                          deg.sum(), backend=b),
    }
    for name, fn in rows.items():
        t = [best_of(lambda: fn(b), args.repeat) for b in backends]
        line = f"{name:<16}" + "".join(f"{x * 1e3:>10.2f}ms" for x in t)
        if len(t) > 1:
            line += f"{t[0] / t[1]:>11.1f}x"
        print(line)


if __name__ == "__main__":
    main()
