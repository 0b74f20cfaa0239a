"""Graph accumulation kernels with a compiled core and a numpy fallback.

The compiled extension (`_graph_core`, built from Cython) is preferred at
import time; if it is absent or the environment variable AMLGRAPH_KERNELS
is set to "py", the pure-numpy backend is used instead. Both backends run
the same loop orders and are value-identical (see benchmarks/ for the
speed comparison).

Public API: matmul, gather_rows, scatter_add_rows, segment_max,
segment_sum, propagate, propagate_transpose, edge_combine. All take and
return plain float64/int64 C-contiguous arrays.
"""

from __future__ import annotations

import os

import numpy as np

from . import _numpy_backend
from ._order import canonical_edge_order, canonical_value_order

if os.environ.get("AMLGRAPH_KERNELS", "").lower() in ("py", "numpy", "python"):
    _impl = _numpy_backend
    BACKEND = "numpy"
else:
    try:
        from . import _graph_core as _impl  # type: ignore[no-redef]

        BACKEND = "compiled"
    except ImportError:
        _impl = _numpy_backend
        BACKEND = "numpy"


def backend_name() -> str:
    return BACKEND


def _f(a) -> np.ndarray:
    return np.ascontiguousarray(a, dtype=np.float64)


def _i(a) -> np.ndarray:
    return np.ascontiguousarray(a, dtype=np.int64)


def matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return _impl.matmul(_f(a), _f(b))


def gather_rows(mat: np.ndarray, idx: np.ndarray) -> np.ndarray:
    return _impl.gather_rows(_f(mat), _i(idx))


def scatter_add_rows(rows: np.ndarray, idx: np.ndarray, n: int) -> np.ndarray:
    return _impl.scatter_add_rows(_f(rows), _i(idx), n)


def segment_max(offsets: np.ndarray, v: np.ndarray) -> np.ndarray:
    return _impl.segment_max(_i(offsets), _f(v))


def segment_sum(offsets: np.ndarray, v: np.ndarray, canonical: bool = False) -> np.ndarray:
    offsets, v = _i(offsets), _f(v)
    order = _i(canonical_value_order(offsets, v)) if (canonical and v.shape[0]) else None
    return _impl.segment_sum_ordered(offsets, v, order)


def propagate(
    offsets: np.ndarray,
    src: np.ndarray,
    w: np.ndarray,
    h: np.ndarray,
    canonical: bool = True,
) -> np.ndarray:
    """out[i] = sum over stored in-edges e of row i of w[e] * h[src[e]]."""
    offsets, src, w, h = _i(offsets), _i(src), _f(w), _f(h)
    order = None
    if canonical and src.shape[0]:
        order = _i(canonical_edge_order(offsets, src, w, h))
    return _impl.propagate_ordered(offsets, src, w, h, order)


def propagate_transpose(
    offsets: np.ndarray, src: np.ndarray, w: np.ndarray, g: np.ndarray, n_src: int
) -> np.ndarray:
    """Adjoint of propagate w.r.t. h (scatter to sources, stored order)."""
    return _impl.propagate_transpose(_i(offsets), _i(src), _f(w), _f(g), n_src)


def edge_combine(
    offsets: np.ndarray, src: np.ndarray, a: np.ndarray, b: np.ndarray
) -> np.ndarray:
    """Per-edge dot product a[row(e), :] . b[src[e], :]."""
    return _impl.edge_combine(_i(offsets), _i(src), _f(a), _f(b))
