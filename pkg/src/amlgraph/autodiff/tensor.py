"""Dense 2-D tensors and the reverse-mode tape.

A Tensor is a plain float64 matrix plus an optional gradient buffer.
Operations (see ops / graph_ops) record themselves on the currently
active Tape; backward() then walks the tape once in reverse insertion
order, accumulating gradients. Tensors used several times receive the sum
of all incoming gradients, which is what residual/skip connections need.

Usage:

    with Tape() as tape:
        loss = some_composition(params, inputs)
    backward(loss, tape)        # populates .grad on grad-enabled tensors
"""

from __future__ import annotations

from typing import Callable, Optional, Sequence

import numpy as np

from ..errors import ShapeError


class Tensor:
    __slots__ = ("data", "grad", "grad_enabled", "_requires", "_softmax_logits", "_log_probs")

    def __init__(self, data, grad_enabled: bool = False):
        arr = np.ascontiguousarray(data, dtype=np.float64)
        if arr.ndim != 2:
            raise ShapeError(f"tensors are 2-D; got shape {arr.shape}")
        self.data = arr
        self.grad: Optional[np.ndarray] = None
        self.grad_enabled = grad_enabled
        self._requires = grad_enabled
        # set by softmax_rows so losses can reuse the stable log-softmax path
        self._softmax_logits: Optional["Tensor"] = None
        self._log_probs: Optional[np.ndarray] = None

    @property
    def rows(self) -> int:
        return self.data.shape[0]

    @property
    def cols(self) -> int:
        return self.data.shape[1]

    @property
    def shape(self) -> tuple:
        return self.data.shape

    def zero_grad(self) -> None:
        self.grad = np.zeros_like(self.data)

    def copy(self) -> "Tensor":
        return Tensor(self.data.copy(), grad_enabled=self.grad_enabled)

    def __repr__(self) -> str:
        flag = ", grad" if self.grad_enabled else ""
        return f"Tensor({self.rows}x{self.cols}{flag})"


class TapeNode:
    __slots__ = ("output", "inputs", "backward_fn")

    def __init__(self, output, inputs, backward_fn):
        self.output = output
        self.inputs = inputs
        self.backward_fn = backward_fn


class Tape:
    """Ordered record of executed operations (a gradient tape)."""

    _stack: list["Tape"] = []

    def __init__(self):
        self.nodes: list[TapeNode] = []

    def __enter__(self) -> "Tape":
        Tape._stack.append(self)
        return self

    def __exit__(self, *exc) -> None:
        Tape._stack.remove(self)

    @staticmethod
    def current() -> Optional["Tape"]:
        return Tape._stack[-1] if Tape._stack else None

    def record(
        self,
        output: Tensor,
        inputs: Sequence[Tensor],
        backward_fn: Callable[[np.ndarray], Sequence[Optional[np.ndarray]]],
    ) -> None:
        output._requires = True
        self.nodes.append(TapeNode(output, tuple(inputs), backward_fn))


def record_op(
    output: Tensor,
    inputs: Sequence[Tensor],
    backward_fn: Callable[[np.ndarray], Sequence[Optional[np.ndarray]]],
) -> Tensor:
    """Attach an op to the active tape if any input participates in grad."""
    tape = Tape.current()
    if tape is not None and any(t._requires for t in inputs):
        tape.record(output, inputs, backward_fn)
    return output


def backward(loss: Tensor, tape: Tape) -> None:
    """Populate gradients of loss w.r.t. every participating tensor.

    Visits each tape node exactly once, in reverse insertion order; the
    tape is consumed. Gradients sum into existing .grad buffers.
    """
    if loss.shape != (1, 1):
        raise ShapeError(f"loss must be 1x1, got {loss.shape}")
    pending: dict[int, np.ndarray] = {id(loss): np.ones((1, 1))}
    holders: dict[int, Tensor] = {id(loss): loss}
    for node in reversed(tape.nodes):
        g = pending.pop(id(node.output), None)
        holders.pop(id(node.output), None)
        if g is not None:
            for tensor, piece in zip(node.inputs, node.backward_fn(g)):
                if piece is None or not tensor._requires:
                    continue
                key = id(tensor)
                if key in pending:
                    pending[key] += piece
                else:
                    # copy: backward rules may hand out aliased buffers
                    pending[key] = np.array(piece, copy=True)
                    holders[key] = tensor
        # retire the node so activations captured by its closure can be
        # collected while the walk is still running
        node.output = None
        node.inputs = ()
        node.backward_fn = None
    for key, g in pending.items():
        tensor = holders[key]
        if tensor.grad_enabled:
            if tensor.grad is None:
                tensor.grad = g
            else:
                tensor.grad += g
    tape.nodes.clear()
