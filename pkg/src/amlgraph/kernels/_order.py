"""Canonical in-row edge orderings, shared by both kernel backends.

Per-destination reductions accumulate in an order derived from the addend
values themselves, never from node indices. Relabeling the nodes of a
graph then reproduces every partial sum bit for bit, which is what makes
the models exactly permutation-equivariant despite float addition being
non-associative.

Ordering rule for weighted row aggregation (sum of w[e]*h[src[e]]):
sort each row's edges by w[e], break ties by comparing the source rows of
h lexicographically. Edges that tie on the full key contribute identical
addends, so their relative order is irrelevant; stable sorting keeps it
deterministic anyway.
"""

from __future__ import annotations

import numpy as np

# number of h columns included in the vectorized sort key; residual ties
# are refined exactly afterwards (rare outside degenerate inputs)
_PREFIX_COLS = 3


def row_ids(offsets: np.ndarray) -> np.ndarray:
    return np.repeat(np.arange(offsets.shape[0] - 1), np.diff(offsets))


def canonical_value_order(offsets: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Within-row ascending-value order for scalar addends.

    Scalar ties need no refinement: equal values are interchangeable under
    addition regardless of position.
    """
    return np.lexsort((v, row_ids(offsets)))


def canonical_edge_order(
    offsets: np.ndarray, src: np.ndarray, w: np.ndarray, h: np.ndarray
) -> np.ndarray:
    rows = row_ids(offsets)
    d = h.shape[1]
    prefix = min(_PREFIX_COLS, d)
    hs = h[src]
    keys = tuple(hs[:, c] for c in range(prefix - 1, -1, -1)) + (w, rows)
    order = np.lexsort(keys)

    if prefix == d:
        return order

    # exact refinement of edges still tied after the key prefix
    rw, rr, rh = w[order], rows[order], hs[order]
    tied = (rw[1:] == rw[:-1]) & (rr[1:] == rr[:-1])
    tied &= (rh[1:, :prefix] == rh[:-1, :prefix]).all(axis=1)
    if not tied.any():
        return order
    flags = np.concatenate(([False], tied))
    run_starts = np.flatnonzero(flags & ~np.concatenate(([False], flags[:-1])))
    for s in run_starts:
        e = s + 1
        while e < flags.shape[0] and flags[e]:
            e += 1
        run = order[s - 1 : e]
        sub = rh[s - 1 : e]
        if (sub != sub[0]).any():
            keys = tuple(sub[:, c] for c in range(d - 1, -1, -1))
            order[s - 1 : e] = run[np.lexsort(keys)]
    return order
