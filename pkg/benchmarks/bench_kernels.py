"""Benchmark the compiled kernels against the pure-Python fallback.

Usage: python benchmarks/bench_kernels.py [--nodes N] [--iterations K]

Covers the two hot loops (Barnes-Hut repulsion, label-propagation rounds)
plus a short end-to-end layout, and verifies on the way that both
implementations produce identical results.
"""

import argparse
import time

import numpy as np

from clauseviz.graph import WeightedGraph
from clauseviz.kernels import available_implementations
from clauseviz.layout import LayoutConfig, layout


def build_graph(n, edges_per_node, seed):
    rng = np.random.default_rng(seed)
    g = WeightedGraph(n)
    for v in range(2, n + 1):
        for u in rng.integers(1, v, size=edges_per_node):
            if int(u) != v:
                g.add_weight(int(u), v, float(rng.random() + 0.5))
    return g


def timeit(fn, repeat=3):
    best = float("inf")
    for _ in range(repeat):
        start = time.perf_counter()
        result = fn()
        best = min(best, time.perf_counter() - start)
    return best, result


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--nodes", type=int, default=5000)
    ap.add_argument("--iterations", type=int, default=20)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    impls = available_implementations()
    if "cython" not in impls:
        print("compiled kernels not built; benchmarking pure Python only")

    n = args.nodes
    g = build_graph(n, 3, seed=1)
    rng = np.random.default_rng(0)
    x = rng.random(n)
    y = rng.random(n)
    coef = 1.0 / n

    print(f"graph: {n} nodes, {g.edge_count} edges; "
          f"repeat={args.repeat}, best-of timings\n")

    rows = []
    results = {}
    for name, impl in impls.items():
        dt, out = timeit(lambda: impl.repulsion_forces(x, y, 0.9, coef),
                         args.repeat)
        results[name] = out
        rows.append((f"repulsion_forces [{name}]", dt,
                     f"{n / dt:,.0f} nodes/s"))
    if len(results) == 2:
        fc, fp = results["cython"], results["python"]
        assert np.array_equal(fc[0], fp[0]) and np.array_equal(fc[1], fp[1]), \
            "kernel implementations disagree"

    indptr, indices, weights = g.csr()
    order = np.random.default_rng(2).permutation(n).astype(np.int64)
    label_results = {}
    for name, impl in impls.items():
        labels = np.arange(n, dtype=np.int64)
        dt, _ = timeit(lambda: impl.propagate_round(
            indptr, indices, weights, labels, order), 1)
        label_results[name] = labels.copy()
        rows.append((f"propagate_round  [{name}]", dt,
                     f"{len(indices) / dt:,.0f} half-edges/s"))
    if len(label_results) == 2:
        assert np.array_equal(label_results["cython"],
                              label_results["python"]), \
            "propagation implementations disagree"

    import clauseviz.kernels as K
    small = build_graph(min(n, 1500), 3, seed=3)
    config = LayoutConfig(iterations=args.iterations, seed=0)
    for name, impl in impls.items():
        K.repulsion_forces = impl.repulsion_forces
        dt, pos = timeit(lambda: layout(small, config), 1)
        rows.append((f"layout {args.iterations} iters [{name}]", dt,
                     f"{small.num_nodes} nodes"))
    K.repulsion_forces = impls.get("cython", impls["python"]).repulsion_forces

    width = max(len(r[0]) for r in rows) + 2
    for label, dt, note in rows:
        print(f"{label:<{width}} {dt * 1000:10.2f} ms   {note}")
    if len(impls) == 2:
        timing = {r[0]: r[1] for r in rows}
        rep = (timing["repulsion_forces [python]"]
               / timing["repulsion_forces [cython]"])
        prop = (timing["propagate_round  [python]"]
                / timing["propagate_round  [cython]"])
        print(f"\nspeedup (pure/compiled): repulsion {rep:.1f}x, "
              f"propagation {prop:.1f}x")
        print("identical results across implementations: yes")


if __name__ == "__main__":
    main()
