"""Minimal reverse-mode automatic differentiation over dense 2-D tensors."""

from .gradcheck import GradCheckReport, grad_check
from .graph_ops import (
    edge_score_sum,
    gather_rows,
    scatter_add,
    segment_softmax,
    segment_softmax_sorted,
    weighted_gather_sum,
)
from .init import xavier_normal_init, xavier_std
from .ops import (
    add,
    add_bias,
    add_scalar,
    concat_cols,
    dropout,
    elu,
    exp,
    leaky_relu,
    log,
    matmul,
    mul,
    mul_scalar,
    neg,
    softmax_rows,
    sum_all,
)
from .rng import RngState
from .tensor import Tape, Tensor, backward, record_op

__all__ = [
    "GradCheckReport",
    "RngState",
    "Tape",
    "Tensor",
    "add",
    "add_bias",
    "add_scalar",
    "backward",
    "concat_cols",
    "dropout",
    "edge_score_sum",
    "elu",
    "exp",
    "gather_rows",
    "grad_check",
    "leaky_relu",
    "log",
    "matmul",
    "mul",
    "mul_scalar",
    "neg",
    "record_op",
    "scatter_add",
    "segment_softmax",
    "segment_softmax_sorted",
    "softmax_rows",
    "sum_all",
    "weighted_gather_sum",
    "xavier_normal_init",
    "xavier_std",
]
