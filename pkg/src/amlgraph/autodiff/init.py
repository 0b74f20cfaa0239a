"""Parameter initialization."""

from __future__ import annotations

import math

from ..errors import ParameterError
from .rng import RngState
from .tensor import Tensor


def xavier_std(rows: int, cols: int, gain: float = 1.0) -> float:
    """Standard deviation of the Xavier-normal distribution for this shape."""
    return gain * math.sqrt(2.0 / (rows + cols))


def xavier_normal_init(
    rows: int, cols: int, gain: float, rng: RngState, grad_enabled: bool = True
) -> Tensor:
    if rows < 1 or cols < 1:
        raise ParameterError(f"init shape must be positive, got {rows}x{cols}")
    std = xavier_std(rows, cols, gain)
    return Tensor(
        (rng.normal(rows * cols) * std).reshape(rows, cols), grad_enabled=grad_enabled
    )
