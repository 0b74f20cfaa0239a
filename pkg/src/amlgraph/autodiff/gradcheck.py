"""Finite-difference verification of analytic gradients."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ..errors import HarnessError, ShapeError
from .tensor import Tape, Tensor, backward


@dataclass
class GradCheckReport:
    max_rel_error: float
    tol: float
    passed: bool
    n_checked: int
    failures: list[tuple[int, int, float, float, float]] = field(default_factory=list)
    """(row, col, analytic, numeric, rel_error) for each failing coordinate."""


def grad_check(
    f: Callable[[Tensor], Tensor],
    at: Tensor,
    h: float = 1e-4,
    tol: float = 1e-3,
) -> GradCheckReport:
    """Compare analytic gradients of scalar-valued f against central differences.

    f must be deterministic (run dropout in inference mode); this is
    verified by evaluating twice and raising HarnessError on a mismatch.
    Relative error per coordinate is |a - n| / max(|a|, |n|, 1e-6).
    """
    probe = Tensor(at.data.copy())
    first = f(probe).data.copy()
    if not np.array_equal(first, f(probe).data):
        raise HarnessError("grad_check: function is not deterministic")

    x = Tensor(at.data.copy(), grad_enabled=True)
    with Tape() as tape:
        out = f(x)
        if out.shape != (1, 1):
            raise ShapeError(f"grad_check: f must return a 1x1 tensor, got {out.shape}")
        backward(out, tape)
    analytic = x.grad if x.grad is not None else np.zeros_like(x.data)

    report = GradCheckReport(max_rel_error=0.0, tol=tol, passed=True, n_checked=x.data.size)
    probe = Tensor(x.data.copy())
    for i in range(x.rows):
        for j in range(x.cols):
            orig = probe.data[i, j]
            probe.data[i, j] = orig + h
            up = f(probe).data[0, 0]
            probe.data[i, j] = orig - h
            down = f(probe).data[0, 0]
            probe.data[i, j] = orig
            numeric = (up - down) / (2.0 * h)
            a = analytic[i, j]
            rel = abs(a - numeric) / max(abs(a), abs(numeric), 1e-6)
            if rel > report.max_rel_error:
                report.max_rel_error = rel
            if rel > tol:
                report.failures.append((i, j, float(a), float(numeric), float(rel)))
    report.passed = not report.failures
    return report
