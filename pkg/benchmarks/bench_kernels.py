"""Compare the numba and numpy kernel backends.

Times the scatter-accumulate primitive in isolation and one full training
epoch on a synthetic graph, for both backends. Run from the repo root:

    python3 benchmarks/bench_kernels.py [--nodes 20000] [--edges 200000]
"""

import argparse
import time

import numpy as np

from clakg.embed import RgcnConfig, TripleGraph, kernels, train
from clakg.embed.rgcn import MessagePassing, RgcnParams, forward_cached


def time_it(fn, repeat=5):
    best = float("inf")
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def synthetic_graph(num_nodes, num_edges, num_relations=7, seed=0):
    rng = np.random.default_rng(seed)
    rows = np.column_stack(
        [
            rng.integers(num_nodes, size=num_edges),
            rng.integers(num_relations, size=num_edges),
            rng.integers(num_nodes, size=num_edges),
        ]
    )
    return TripleGraph(num_nodes, num_relations, np.unique(rows, axis=0))


def bench_scatter(num_nodes, num_edges, h_dim, backend):
    rng = np.random.default_rng(1)
    dst = rng.integers(num_nodes, size=num_edges)
    src = rng.integers(num_nodes, size=num_edges)
    coef = rng.uniform(0.1, 1.0, size=num_edges)
    values = rng.normal(size=(num_nodes, h_dim))
    out = np.zeros_like(values)
    kernels.set_backend(backend)
    kernels.gather_scale_scatter(out, dst, src, coef, values)  # warm-up / JIT
    out[:] = 0.0
    return time_it(lambda: kernels.gather_scale_scatter(out, dst, src, coef, values))


def bench_forward(tg, backend):
    kernels.set_backend(backend)
    config = RgcnConfig(h_dim=16, seed=0)
    params = RgcnParams.random(
        tg.num_nodes, tg.num_relations, config, np.random.default_rng(0)
    )
    mp = MessagePassing(tg.num_nodes, tg.num_relations, tg.triples)
    forward_cached(mp, params)  # warm-up / JIT
    return time_it(lambda: forward_cached(mp, params), repeat=3)


def bench_epoch(tg, backend):
    kernels.set_backend(backend)
    config = RgcnConfig(h_dim=16, num_epochs=1, seed=0)
    train(tg, config)  # warm-up / JIT
    return time_it(lambda: train(tg, config), repeat=3)


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--nodes", type=int, default=20000)
    parser.add_argument("--edges", type=int, default=200000)
    parser.add_argument("--h-dim", type=int, default=16)
    args = parser.parse_args()

    backends = ["numpy"]
    if kernels._HAS_NUMBA:
        backends.insert(0, "numba")
    else:
        print("numba not importable; benchmarking numpy only")

    tg = synthetic_graph(args.nodes, args.edges)
    print(f"graph: {tg.num_nodes} nodes, {len(tg.triples)} edges, "
          f"{tg.num_relations} relations, h_dim {args.h_dim}")
    print(f"{'benchmark':<28}" + "".join(f"{b:>12}" for b in backends) + f"{'speedup':>10}")

    rows = [
        ("scatter-accumulate", lambda b: bench_scatter(args.nodes, args.edges, args.h_dim, b)),
        ("forward pass (2 layers)", lambda b: bench_forward(tg, b)),
        ("full training epoch", lambda b: bench_epoch(tg, b)),
    ]
    for name, fn in rows:
        times = {b: fn(b) for b in backends}
        line = f"{name:<28}" + "".join(f"{times[b] * 1e3:>10.1f}ms" for b in backends)
        if len(backends) == 2:
            line += f"{times['numpy'] / times['numba']:>9.1f}x"
        print(line)
    kernels.set_backend(None)


if __name__ == "__main__":
    main()
