"""Differentiable sparse/graph operations.

Two flavors live here. The generic ops (scatter_add, segment_softmax,
gather_rows) accept arbitrary index mappings. The *_sorted / fused ops
assume edges are already grouped by destination row — the layout Graph
stores — and skip the regrouping cost; message-passing layers use those.

Per-row forward reductions run in the canonical value-derived order
provided by the kernel layer, so node relabeling permutes results
exactly. Backward scatters use stored order (gradients do not need the
equivariance guarantee).
"""

from __future__ import annotations

import numpy as np

from .. import kernels
from ..errors import ShapeError
from .tensor import Tensor, record_op


def _check_index(idx: np.ndarray, n: int, what: str) -> None:
    if idx.size and (idx.min() < 0 or idx.max() >= n):
        bad = int(np.argmax((idx < 0) | (idx >= n)))
        raise IndexError(f"{what}[{bad}] = {idx[bad]} out of range for size {n}")


def gather_rows(values: Tensor, idx: np.ndarray) -> Tensor:
    idx = np.asarray(idx, dtype=np.int64)
    _check_index(idx, values.rows, "index")
    out = Tensor(kernels.gather_rows(values.data, idx))
    return record_op(
        out, (values,), lambda g: (kernels.scatter_add_rows(g, idx, values.rows),)
    )


def scatter_add(values: Tensor, dest: np.ndarray, n_nodes: int) -> Tensor:
    """Row i of the result is the sum of value rows with dest == i."""
    dest = np.asarray(dest, dtype=np.int64)
    if dest.shape[0] != values.rows:
        raise ShapeError(
            f"scatter_add: {values.rows} value rows but {dest.shape[0]} destinations"
        )
    _check_index(dest, n_nodes, "dest")
    out = Tensor(kernels.scatter_add_rows(values.data, dest, n_nodes))
    return record_op(out, (values,), lambda g: (kernels.gather_rows(g, dest),))


def segment_softmax(scores: Tensor, segment_of: np.ndarray, n_segments: int) -> Tensor:
    """Softmax of the scores within each segment; empty segments yield nothing."""
    _shape_e1(scores, "segment_softmax")
    seg = np.asarray(segment_of, dtype=np.int64)
    if seg.shape[0] != scores.rows:
        raise ShapeError(
            f"segment_softmax: {scores.rows} scores but {seg.shape[0]} segment ids"
        )
    _check_index(seg, n_segments, "segment")
    order = np.argsort(seg, kind="stable")
    offsets = np.zeros(n_segments + 1, dtype=np.int64)
    np.cumsum(np.bincount(seg, minlength=n_segments), out=offsets[1:])
    s = scores.data[:, 0][order]
    seg_sorted = seg[order]
    ex = np.exp(s - kernels.segment_max(offsets, s)[seg_sorted])
    denom = kernels.segment_sum(offsets, ex, canonical=True)
    alpha = np.empty_like(ex)
    alpha[order] = ex / denom[seg_sorted]
    out = Tensor(alpha[:, None])

    def backward_fn(g):
        t = out.data * g
        inner = np.bincount(seg, weights=t[:, 0], minlength=n_segments)
        return (out.data * (g - inner[seg][:, None]),)

    return record_op(out, (scores,), backward_fn)


def _shape_e1(t: Tensor, ctx: str) -> None:
    if t.cols != 1:
        raise ShapeError(f"{ctx}: expected an Ex1 tensor, got {t.shape}")


def segment_softmax_sorted(scores: Tensor, offsets: np.ndarray, dst: np.ndarray) -> Tensor:
    """segment_softmax for scores already grouped by destination row."""
    _shape_e1(scores, "segment_softmax_sorted")
    s = scores.data[:, 0]
    ex = np.exp(s - kernels.segment_max(offsets, s)[dst])
    denom = kernels.segment_sum(offsets, ex, canonical=True)
    out = Tensor((ex / denom[dst])[:, None])

    def backward_fn(g):
        inner = kernels.segment_sum(offsets, (out.data * g)[:, 0], canonical=False)
        return (out.data * (g - inner[dst][:, None]),)

    return record_op(out, (scores,), backward_fn)


def weighted_gather_sum(
    weights: Tensor, values: Tensor, offsets: np.ndarray, src: np.ndarray
) -> Tensor:
    """out[i] = sum over in-edges e of row i of weights[e] * values[src[e]].

    The workhorse of message passing: GCN uses fixed normalization
    coefficients as weights, attention layers use learned coefficients
    (gradients flow into both operands).
    """
    _shape_e1(weights, "weighted_gather_sum")
    w = weights.data[:, 0]
    out = Tensor(kernels.propagate(offsets, src, w, values.data))

    def backward_fn(g):
        dw = None
        if weights._requires:
            dw = kernels.edge_combine(offsets, src, g, values.data)[:, None]
        dv = None
        if values._requires:
            dv = kernels.propagate_transpose(offsets, src, w, g, values.rows)
        return dw, dv

    return record_op(out, (weights, values), backward_fn)


def edge_score_sum(
    s_dst: Tensor, s_src: Tensor, offsets: np.ndarray, src: np.ndarray, dst: np.ndarray
) -> Tensor:
    """Per stored edge e: out[e] = s_dst[row(e)] + s_src[src[e]]."""
    _shape_e1(s_dst, "edge_score_sum")
    _shape_e1(s_src, "edge_score_sum")
    out = Tensor((s_dst.data[dst, 0] + s_src.data[src, 0])[:, None])

    def backward_fn(g):
        gd = None
        if s_dst._requires:
            gd = kernels.segment_sum(offsets, g[:, 0], canonical=False)[:, None]
        gs = None
        if s_src._requires:
            gs = kernels.scatter_add_rows(g, src, s_src.rows)
        return gd, gs

    return record_op(out, (s_dst, s_src), backward_fn)
