"""Differentiable dense operations.

All forward math is float64. Reduction order in matmul is fixed by the
kernel backend (sequential over the contracted axis), which keeps each
output row a pure function of the corresponding input row: that, plus the
canonical graph reductions in graph_ops, is what makes the models exactly
permutation-equivariant.
"""

from __future__ import annotations

import numpy as np

from .. import kernels
from ..errors import DomainError, ParameterError, ShapeError
from .rng import RngState
from .tensor import Tensor, record_op


def _shape_check(cond: bool, msg: str) -> None:
    if not cond:
        raise ShapeError(msg)


def matmul(a: Tensor, b: Tensor) -> Tensor:
    _shape_check(
        a.cols == b.rows,
        f"matmul: inner dimensions differ, {a.shape} x {b.shape}",
    )
    out = Tensor(kernels.matmul(a.data, b.data))

    def backward_fn(g):
        da = kernels.matmul(g, b.data.T) if a._requires else None
        db = kernels.matmul(a.data.T, g) if b._requires else None
        return da, db

    return record_op(out, (a, b), backward_fn)


def add(a: Tensor, b: Tensor) -> Tensor:
    _shape_check(a.shape == b.shape, f"add: shapes differ, {a.shape} vs {b.shape}")
    out = Tensor(a.data + b.data)
    return record_op(out, (a, b), lambda g: (g, g))


def mul(a: Tensor, b: Tensor) -> Tensor:
    _shape_check(a.shape == b.shape, f"mul: shapes differ, {a.shape} vs {b.shape}")
    out = Tensor(a.data * b.data)
    return record_op(out, (a, b), lambda g: (g * b.data, g * a.data))


def neg(a: Tensor) -> Tensor:
    return record_op(Tensor(-a.data), (a,), lambda g: (-g,))


def add_scalar(a: Tensor, c: float) -> Tensor:
    return record_op(Tensor(a.data + c), (a,), lambda g: (g,))


def mul_scalar(a: Tensor, c: float) -> Tensor:
    return record_op(Tensor(a.data * c), (a,), lambda g: (g * c,))


def exp(a: Tensor) -> Tensor:
    out = Tensor(np.exp(a.data))
    return record_op(out, (a,), lambda g: (g * out.data,))


def log(a: Tensor) -> Tensor:
    if np.any(a.data <= 0.0):
        i, j = np.argwhere(a.data <= 0.0)[0]
        raise DomainError(f"log: non-positive entry {a.data[i, j]!r} at ({i}, {j})")
    return record_op(Tensor(np.log(a.data)), (a,), lambda g: (g / a.data,))


def elu(a: Tensor) -> Tensor:
    """ELU with alpha=1: x for x >= 0, exp(x)-1 otherwise."""
    neg_part = a.data < 0.0
    out_data = np.where(neg_part, np.expm1(a.data), a.data)
    out = Tensor(out_data)
    # derivative on the negative side is exp(x) = out + 1
    return record_op(out, (a,), lambda g: (g * np.where(neg_part, out.data + 1.0, 1.0),))


def leaky_relu(a: Tensor, slope: float = 0.2) -> Tensor:
    neg_part = a.data < 0.0
    out = Tensor(np.where(neg_part, slope * a.data, a.data))
    return record_op(out, (a,), lambda g: (g * np.where(neg_part, slope, 1.0),))


def add_bias(a: Tensor, b: Tensor) -> Tensor:
    """Broadcast-add a 1x1 bias to every entry."""
    _shape_check(b.shape == (1, 1), f"add_bias: bias must be 1x1, got {b.shape}")
    out = Tensor(a.data + b.data[0, 0])
    return record_op(out, (a, b), lambda g: (g, np.array([[g.sum()]])))


def sum_all(a: Tensor) -> Tensor:
    out = Tensor([[float(a.data.sum())]])
    return record_op(out, (a,), lambda g: (np.full_like(a.data, g[0, 0]),))


def concat_cols(parts: list[Tensor]) -> Tensor:
    rows = parts[0].rows
    _shape_check(
        all(p.rows == rows for p in parts),
        f"concat_cols: row counts differ: {[p.shape for p in parts]}",
    )
    out = Tensor(np.concatenate([p.data for p in parts], axis=1))
    splits = np.cumsum([p.cols for p in parts])[:-1]

    def backward_fn(g):
        pieces = np.split(g, splits, axis=1)
        return tuple(pieces[i] if parts[i]._requires else None for i in range(len(parts)))

    return record_op(out, tuple(parts), backward_fn)


def softmax_rows(a: Tensor) -> Tensor:
    """Row-wise softmax with per-row max subtraction.

    The output remembers its pre-softmax input so loss functions can take
    the fused log-softmax route instead of log(prob).
    """
    shifted = a.data - a.data.max(axis=1, keepdims=True)
    ex = np.exp(shifted)
    denom = ex.sum(axis=1, keepdims=True)
    out = Tensor(ex / denom)
    out._softmax_logits = a
    out._log_probs = shifted - np.log(denom)

    def backward_fn(g):
        p = out.data
        return (p * (g - (g * p).sum(axis=1, keepdims=True)),)

    return record_op(out, (a,), backward_fn)


def dropout(a: Tensor, p: float, training: bool, rng: RngState) -> Tensor:
    """Inverted dropout: zero entries with probability p, scale by 1/(1-p).

    Inference mode is exactly the identity and draws nothing from rng.
    """
    if not 0.0 <= p < 1.0:
        raise ParameterError(f"dropout probability must be in [0, 1), got {p}")
    if not training or p == 0.0:
        return a
    keep = rng.uniform(a.data.size).reshape(a.shape) >= p
    scale = 1.0 / (1.0 - p)
    out = Tensor(a.data * keep * scale)
    return record_op(out, (a,), lambda g: (g * keep * scale,))
