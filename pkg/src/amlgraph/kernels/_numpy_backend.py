"""Pure-numpy accumulation kernels (fallback backend).

Each routine mirrors the compiled backend bitwise, so reduction order is
pinned everywhere:

  * matmul accumulates over k sequentially for every output element
    (equivalent to an i-k-j loop), which makes each output row a function
    of the input row's values only — a row permutation permutes the
    result exactly.
  * segmented sums accumulate strictly left-to-right in the order the
    caller provides. np.add.at is the only numpy reduction primitive that
    guarantees this (np.sum and np.add.reduceat switch to pairwise
    blocking on contiguous data), so every sum here goes through it.
  * multiply and add stay separate instructions; the compiled backend is
    built with -ffp-contract=off to match.
"""

from __future__ import annotations

import numpy as np


def matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    n, k = a.shape
    m = b.shape[1]
    out = np.zeros((n, m))
    tmp = np.empty((n, m))
    for p in range(k):
        np.multiply(a[:, p : p + 1], b[p : p + 1, :], out=tmp)
        out += tmp
    return out


def gather_rows(mat: np.ndarray, idx: np.ndarray) -> np.ndarray:
    return mat[idx]


def scatter_add_rows(rows: np.ndarray, idx: np.ndarray, n: int) -> np.ndarray:
    out = np.zeros((n, rows.shape[1]))
    np.add.at(out, idx, rows)
    return out


def _segmented_sum(values: np.ndarray, offsets: np.ndarray) -> np.ndarray:
    """Strictly sequential within-segment sum (values grouped by segment)."""
    n = offsets.shape[0] - 1
    out = np.zeros((n,) + values.shape[1:])
    if values.shape[0]:
        rows = np.repeat(np.arange(n), np.diff(offsets))
        np.add.at(out, rows, values)
    return out


def segment_max(offsets: np.ndarray, v: np.ndarray) -> np.ndarray:
    n = offsets.shape[0] - 1
    starts, ends = offsets[:-1], offsets[1:]
    nonempty = ends > starts
    out = np.zeros(n)
    if nonempty.any():
        out[nonempty] = np.maximum.reduceat(v, starts[nonempty])
    return out


def segment_sum_ordered(
    offsets: np.ndarray, v: np.ndarray, order: np.ndarray | None
) -> np.ndarray:
    return _segmented_sum(v if order is None else v[order], offsets)


def propagate_ordered(
    offsets: np.ndarray,
    src: np.ndarray,
    w: np.ndarray,
    h: np.ndarray,
    order: np.ndarray | None,
) -> np.ndarray:
    """out[i] = sum over in-edges e of row i (in `order`) of w[e]*h[src[e]]."""
    if src.shape[0] == 0:
        return np.zeros((offsets.shape[0] - 1, h.shape[1]))
    if order is not None:
        src, w = src[order], w[order]
    scaled = h[src] * w[:, None]
    return _segmented_sum(scaled, offsets)


def propagate_transpose(
    offsets: np.ndarray, src: np.ndarray, w: np.ndarray, g: np.ndarray, n_src: int
) -> np.ndarray:
    """Adjoint of propagate w.r.t. h: out[src[e]] += w[e]*g[row(e)], stored order."""
    out = np.zeros((n_src, g.shape[1]))
    if src.shape[0]:
        rows = np.repeat(np.arange(offsets.shape[0] - 1), np.diff(offsets))
        np.add.at(out, src, g[rows] * w[:, None])
    return out


def edge_combine(
    offsets: np.ndarray, src: np.ndarray, a: np.ndarray, b: np.ndarray
) -> np.ndarray:
    """Per-edge dot product: out[e] = a[row(e), :] . b[src[e], :]."""
    e_count = src.shape[0]
    out = np.zeros(e_count)
    if e_count:
        rows = np.repeat(np.arange(offsets.shape[0] - 1), np.diff(offsets))
        ar, bs = a[rows], b[src]
        for k in range(a.shape[1]):
            out += ar[:, k] * bs[:, k]
    return out
