"""Compare the compiled kernel backend against the pure-numpy fallback.

Times the hot per-edge kernels on a synthetic graph at a configurable
scale, then (with --epoch) a full GAT-ResNet training epoch per backend
in subprocesses, since the backend is fixed at import time.

    python benchmarks/bench_kernels.py
    python benchmarks/bench_kernels.py --nodes 50000 --edges 250000 --epoch
"""

from __future__ import annotations

import argparse
import os
import subprocess
import sys
import time
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from amlgraph.kernels import _numpy_backend  # noqa: E402
from amlgraph.kernels._order import canonical_edge_order, canonical_value_order  # noqa: E402

try:
    from amlgraph.kernels import _graph_core
except ImportError:
    _graph_core = None


def timeit(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def make_graph(rng, n, e):
    dst = np.sort(rng.integers(0, n, e)).astype(np.int64)
    src = rng.integers(0, n, e).astype(np.int64)
    offsets = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(dst, minlength=n), out=offsets[1:])
    return offsets, src, dst


def kernel_benchmarks(args):
    rng = np.random.default_rng(0)
    n, e, d = args.nodes, args.edges, args.dim
    offsets, src, dst = make_graph(rng, n, e)
    w = rng.standard_normal(e)
    h = rng.standard_normal((n, d))
    g = rng.standard_normal((n, d))
    scores = rng.standard_normal(e)
    rows_ed = rng.standard_normal((e, d))
    idx = rng.integers(0, n, e).astype(np.int64)
    a = rng.standard_normal((n, 166))
    b = rng.standard_normal((166, d))
    edge_order = canonical_edge_order(offsets, src, w, h).astype(np.int64)
    value_order = canonical_value_order(offsets, scores).astype(np.int64)

    cases = [
        ("matmul (n x 166 @ 166 x d)", lambda impl: impl.matmul(a, b)),
        ("propagate (canonical order)",
         lambda impl: impl.propagate_ordered(offsets, src, w, h, edge_order)),
        ("propagate_transpose", lambda impl: impl.propagate_transpose(offsets, src, w, g, n)),
        ("edge_combine", lambda impl: impl.edge_combine(offsets, src, g, h)),
        ("segment_sum (canonical order)",
         lambda impl: impl.segment_sum_ordered(offsets, scores, value_order)),
        ("segment_max", lambda impl: impl.segment_max(offsets, scores)),
        ("scatter_add_rows", lambda impl: impl.scatter_add_rows(rows_ed, idx, n)),
        ("gather_rows", lambda impl: impl.gather_rows(h, idx)),
    ]

    print(f"graph: {n} nodes, {e} edges, width {d} (best of {args.repeat})")
    header = f"{'kernel':34}{'numpy':>12}{'compiled':>12}{'speedup':>10}"
    print(header)
    print("-" * len(header))
    for name, call in cases:
        t_np = timeit(lambda: call(_numpy_backend), args.repeat)
        if _graph_core is None:
            print(f"{name:34}{t_np * 1e3:10.2f}ms{'n/a':>12}{'n/a':>10}")
            continue
        t_c = timeit(lambda: call(_graph_core), args.repeat)
        same = np.array_equal(np.asarray(call(_numpy_backend)), np.asarray(call(_graph_core)))
        marker = "" if same else "  (!! mismatch)"
        print(f"{name:34}{t_np * 1e3:10.2f}ms{t_c * 1e3:10.2f}ms{t_np / t_c:9.1f}x{marker}")


EPOCH_SNIPPET = """
import time
import numpy as np
from amlgraph import kernels
from amlgraph.autodiff import RngState, Tape, Tensor, backward
from amlgraph.data import build_graph, synthetic_graph, temporal_split
from amlgraph.models import GatResNetConfig, forward, init_params, named_tensors
from amlgraph.training import AdamState, TrainConfig, adam_step, weighted_cross_entropy, zero_grads

n = {n_half}
ds = synthetic_graph(n, n, 3.0, min(1.0, {e} / (2.0 * n * n)), seed=0)
graph = build_graph(ds)
masks = temporal_split(ds, 34)
params = init_params(GatResNetConfig(in_dim=166, hidden={hidden}, heads=4), RngState(0))
tensors = named_tensors(params)
adam = AdamState.for_params(tensors)
x = Tensor(ds.features)
rng = RngState(1)
start = time.perf_counter()
for _ in range({epochs}):
    zero_grads(tensors)
    with Tape() as tape:
        probs = forward(params, graph, x, training=True, rng=rng)
        loss = weighted_cross_entropy(probs, ds.label, (0.3, 0.7), masks.train_eligible)
        backward(loss, tape)
    adam_step(tensors, adam, 0.001)
per_epoch = (time.perf_counter() - start) / {epochs}
print(f"{{kernels.backend_name():>10}} backend: {{per_epoch * 1e3:8.1f}} ms/epoch "
      f"({{graph.csr_neighbors.shape[0]}} stored edges)")
"""


def epoch_benchmark(args):
    print()
    print(f"GAT-ResNet training epoch ({2 * args.epoch_nodes} nodes, hidden {args.hidden}):")
    code = EPOCH_SNIPPET.format(
        n_half=args.epoch_nodes, e=args.edges, hidden=args.hidden, epochs=args.epoch_count
    )
    for backend in ("", "py"):
        env = dict(os.environ, AMLGRAPH_KERNELS=backend)
        env["PYTHONPATH"] = str(Path(__file__).resolve().parent.parent / "src")
        subprocess.run([sys.executable, "-c", code], env=env, check=True)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--nodes", type=int, default=20_000)
    parser.add_argument("--edges", type=int, default=100_000)
    parser.add_argument("--dim", type=int, default=64)
    parser.add_argument("--repeat", type=int, default=3)
    parser.add_argument("--epoch", action="store_true", help="also time a training epoch")
    parser.add_argument("--epoch-nodes", type=int, default=2_000,
                        help="nodes per class for the epoch benchmark")
    parser.add_argument("--epoch-count", type=int, default=3)
    parser.add_argument("--hidden", type=int, default=32)
    args = parser.parse_args()
    if _graph_core is None:
        print("note: compiled backend not built (run: python setup.py build_ext --inplace)")
    kernel_benchmarks(args)
    if args.epoch:
        epoch_benchmark(args)


if __name__ == "__main__":
    main()
