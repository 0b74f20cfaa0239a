"""Dense brute-force oracles and fixture builders shared across tests.

Everything here is written against plain numpy with materialized n x n
matrices, independent of the package's sparse kernels and autodiff, so it
can serve as the second route for equivalence checks.
"""

import numpy as np

from amlgraph.data import EllipticDataset, synthetic_graph, temporal_split


def np_softmax_rows(x):
    shifted = x - x.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def np_elu(x):
    return np.where(x < 0, np.expm1(x), x)


def np_leaky(x, slope=0.2):
    return np.where(x < 0, slope * x, x)


def dense_mask(n, edges, symmetrize=True):
    """Boolean attend-mask: m[i, j] True when j sends a message to i."""
    m = np.eye(n, dtype=bool)
    for s, d in edges:
        m[d, s] = True
        if symmetrize:
            m[s, d] = True
    return m


def dense_norm_adjacency(n, edges, symmetrize=True):
    a = dense_mask(n, edges, symmetrize).astype(float)
    deg = a.sum(axis=1)
    dinv = 1.0 / np.sqrt(deg)
    return dinv[:, None] * a * dinv[None, :]


def dense_gcn_forward(params, a_norm, x):
    h = np_elu(a_norm @ (x @ params.w1.data))
    return np_softmax_rows(a_norm @ (h @ params.w2.data))


def dense_gat_layer(heads, mask, h, concat, slope=0.2):
    outs = []
    for head in heads:
        z = h @ head.W.data
        s_dst = (z @ head.a_dst.data)[:, 0]
        s_src = (z @ head.a_src.data)[:, 0]
        scores = np_leaky(s_dst[:, None] + s_src[None, :], slope)
        scores = np.where(mask, scores, -np.inf)
        alpha = np.zeros_like(scores)
        for i in range(mask.shape[0]):
            row = scores[i][mask[i]]
            e = np.exp(row - row.max())
            alpha[i][mask[i]] = e / e.sum()
        outs.append(alpha @ z)
    if concat:
        return np.concatenate(outs, axis=1)
    return sum(outs) / len(outs)


def dense_gat_forward(params, mask, x):
    cfg = params.config
    h = np_elu(dense_gat_layer(params.layers[0], mask, x, True, cfg.attn_slope))
    return np_softmax_rows(dense_gat_layer(params.layers[1], mask, h, False, cfg.attn_slope))


def dense_gat_resnet_forward(params, mask, x):
    cfg = params.config
    l1 = np_elu(dense_gat_layer(params.layers[0], mask, x, True, cfg.attn_slope))
    l2 = np_elu(dense_gat_layer(params.layers[1], mask, l1, True, cfg.attn_slope))
    logits = dense_gat_layer(params.layers[2], mask, l1 + l2, False, cfg.attn_slope)
    if cfg.use_skip:
        logits = logits + x @ params.w_skip.data
    return np_softmax_rows(logits)


def permute_dataset(ds, perm):
    """Relabel nodes: new index of node i is perm[i]."""
    perm = np.asarray(perm, dtype=np.int64)
    n = ds.n_nodes
    inv = np.empty(n, dtype=np.int64)
    inv[perm] = np.arange(n)
    tx_ids = ds.tx_ids[inv]
    return EllipticDataset(
        n_nodes=n,
        features=np.ascontiguousarray(ds.features[inv]),
        time_step=ds.time_step[inv],
        label=ds.label[inv],
        edges=perm[ds.edges] if ds.edges.size else ds.edges,
        tx_ids=tx_ids,
        tx_id_index={int(t): i for i, t in enumerate(tx_ids)},
        standardized=ds.standardized,
    )


def random_dataset(rng, n_max=20, density=0.25):
    """Small random labeled dataset for oracle sweeps."""
    n = int(rng.integers(2, n_max))
    e = int(rng.integers(0, max(1, int(density * n * n))))
    edges = rng.integers(0, n, (e, 2)).astype(np.int64)
    tx = np.arange(n, dtype=np.int64)
    return EllipticDataset(
        n_nodes=n,
        features=np.ascontiguousarray(rng.standard_normal((n, 166))),
        time_step=(rng.integers(1, 50, n)).astype(np.int64),
        label=rng.integers(0, 2, n).astype(np.int64),
        edges=edges,
        tx_ids=tx,
        tx_id_index={int(t): i for i, t in enumerate(tx)},
    )


def separable_fixture(seed=0):
    """The 50+50 separable synthetic dataset plus its 34-step split."""
    ds = synthetic_graph(50, 50, 10.0, 0.1, seed=seed)
    return ds, temporal_split(ds, 34)
