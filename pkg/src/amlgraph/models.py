"""Graph network architectures: GCN, GAT, and GAT-ResNet.

All three are pure forward functions over the autodiff core: given
(params, graph, features, training flag, rng) they return class
probabilities (rows summing to 1). Message passing runs on the stored
CSR layout; every per-row reduction uses the canonical value-ordered
kernels, so node relabeling permutes outputs exactly.

Architecture notes:
  * hidden GAT layers concatenate their attention heads, the output
    layer averages them; "hidden" is the per-head width.
  * attention scores use leaky-relu with slope 0.2; every node attends
    to itself via the graph's self-loops.
  * dropout is applied to hidden activations after ELU and to attention
    coefficients during training; inference is deterministic.
  * GAT-ResNet: three layers, residual sum of the first two layers'
    outputs, optional input-to-output skip projection (use_skip).
  * no bias terms; all weights are Xavier-normal (gain 1).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

from .autodiff import (
    RngState,
    Tensor,
    add,
    concat_cols,
    dropout,
    edge_score_sum,
    elu,
    leaky_relu,
    matmul,
    mul_scalar,
    segment_softmax_sorted,
    softmax_rows,
    weighted_gather_sum,
    xavier_normal_init,
)
from .data import Graph
from .errors import ParameterError, ShapeError


def _check_common(cfg) -> None:
    if min(cfg.in_dim, cfg.hidden, cfg.out_dim) < 1:
        raise ParameterError(f"model dimensions must be positive: {cfg}")
    if not 0.0 <= cfg.dropout < 1.0:
        raise ParameterError(f"dropout must be in [0, 1), got {cfg.dropout}")


@dataclass
class GcnConfig:
    in_dim: int = 166
    hidden: int = 100
    out_dim: int = 2
    n_layers: int = 2
    dropout: float = 0.5

    def __post_init__(self):
        _check_common(self)
        if self.n_layers != 2:
            raise ParameterError("the GCN is a 2-layer architecture")


@dataclass
class GatConfig:
    in_dim: int = 166
    hidden: int = 100
    out_dim: int = 2
    n_layers: int = 2
    heads: int = 8
    dropout: float = 0.5
    attn_slope: float = 0.2

    def __post_init__(self):
        _check_common(self)
        if self.n_layers != 2:
            raise ParameterError("the GAT is a 2-layer architecture")
        if self.heads < 1:
            raise ParameterError(f"heads must be >= 1, got {self.heads}")


@dataclass
class GatResNetConfig:
    in_dim: int = 166
    hidden: int = 100
    out_dim: int = 2
    n_layers: int = 3
    heads: int = 4
    dropout: float = 0.5
    use_skip: bool = True
    attn_slope: float = 0.2

    def __post_init__(self):
        _check_common(self)
        if self.n_layers != 3:
            raise ParameterError("the GAT-ResNet is a 3-layer architecture")
        if self.heads < 1:
            raise ParameterError(f"heads must be >= 1, got {self.heads}")


ModelConfig = Union[GcnConfig, GatConfig, GatResNetConfig]


@dataclass
class GatHeadParams:
    W: Tensor
    a_dst: Tensor   # attention vector half applied to the destination
    a_src: Tensor   # half applied to the source/neighbor


@dataclass
class GcnParams:
    config: GcnConfig
    w1: Tensor
    w2: Tensor


@dataclass
class GatParams:
    config: GatConfig
    layers: list = field(default_factory=list)  # list of per-head lists


@dataclass
class GatResNetParams:
    config: GatResNetConfig
    layers: list = field(default_factory=list)
    w_skip: Optional[Tensor] = None


ModelParams = Union[GcnParams, GatParams, GatResNetParams]


def _init_head(d_in: int, d_out: int, rng: RngState) -> GatHeadParams:
    w = xavier_normal_init(d_in, d_out, 1.0, rng)
    a = xavier_normal_init(2 * d_out, 1, 1.0, rng)
    return GatHeadParams(
        W=w,
        a_dst=Tensor(a.data[:d_out], grad_enabled=True),
        a_src=Tensor(a.data[d_out:], grad_enabled=True),
    )


def init_params(config: ModelConfig, rng: RngState) -> ModelParams:
    """Xavier-normal parameters for the given architecture (deterministic per seed)."""
    if isinstance(config, GcnConfig):
        return GcnParams(
            config=config,
            w1=xavier_normal_init(config.in_dim, config.hidden, 1.0, rng),
            w2=xavier_normal_init(config.hidden, config.out_dim, 1.0, rng),
        )
    if isinstance(config, GatConfig):
        h = config.heads
        layer1 = [_init_head(config.in_dim, config.hidden, rng) for _ in range(h)]
        layer2 = [_init_head(h * config.hidden, config.out_dim, rng) for _ in range(h)]
        return GatParams(config=config, layers=[layer1, layer2])
    if isinstance(config, GatResNetConfig):
        h = config.heads
        width = h * config.hidden
        layers = [
            [_init_head(config.in_dim, config.hidden, rng) for _ in range(h)],
            [_init_head(width, config.hidden, rng) for _ in range(h)],
            [_init_head(width, config.out_dim, rng) for _ in range(h)],
        ]
        w_skip = None
        if config.use_skip:
            w_skip = xavier_normal_init(config.in_dim, config.out_dim, 1.0, rng)
        return GatResNetParams(config=config, layers=layers, w_skip=w_skip)
    raise ParameterError(f"unknown model config type {type(config).__name__}")


def named_tensors(params: ModelParams) -> dict:
    """Flat, deterministically ordered name -> Tensor view of the parameters."""
    out: dict[str, Tensor] = {}
    if isinstance(params, GcnParams):
        out["layer1.W"] = params.w1
        out["layer2.W"] = params.w2
        return out
    for l, heads in enumerate(params.layers, start=1):
        for h, head in enumerate(heads, start=1):
            out[f"layer{l}.head{h}.W"] = head.W
            out[f"layer{l}.head{h}.a_dst"] = head.a_dst
            out[f"layer{l}.head{h}.a_src"] = head.a_src
    if isinstance(params, GatResNetParams) and params.w_skip is not None:
        out["skip.W"] = params.w_skip
    return out


def gat_layer(
    heads: list,
    graph: Graph,
    h: Tensor,
    concat: bool,
    training: bool,
    rng: RngState,
    attn_slope: float = 0.2,
    attn_dropout: float = 0.0,
) -> Tensor:
    """One multi-head attention layer over the stored graph.

    Per head: project, score each stored edge (j -> i) with
    leaky_relu(a_dst.z_i + a_src.z_j), normalize scores per destination
    with a segment softmax (self-loops included), then aggregate the
    weighted neighbor projections. Heads are concatenated when `concat`,
    averaged otherwise.
    """
    offsets, src, dst = graph.csr_offsets, graph.csr_neighbors, graph.csr_dst
    outputs = []
    for head in heads:
        z = matmul(h, head.W)
        s_dst = matmul(z, head.a_dst)
        s_src = matmul(z, head.a_src)
        scores = leaky_relu(edge_score_sum(s_dst, s_src, offsets, src, dst), attn_slope)
        alpha = segment_softmax_sorted(scores, offsets, dst)
        if training and attn_dropout > 0.0:
            alpha = dropout(alpha, attn_dropout, training, rng)
        outputs.append(weighted_gather_sum(alpha, z, offsets, src))
    if concat:
        return concat_cols(outputs) if len(outputs) > 1 else outputs[0]
    acc = outputs[0]
    for part in outputs[1:]:
        acc = add(acc, part)
    return mul_scalar(acc, 1.0 / len(outputs)) if len(outputs) > 1 else acc


def _check_inputs(params, graph: Graph, x: Tensor) -> None:
    cfg = params.config
    if x.rows != graph.n_nodes:
        raise ShapeError(f"features have {x.rows} rows but graph has {graph.n_nodes} nodes")
    if x.cols != cfg.in_dim:
        raise ShapeError(f"features are {x.cols}-wide but the model expects {cfg.in_dim}")


def gcn_forward(
    params: GcnParams, graph: Graph, x: Tensor, training: bool = False,
    rng: Optional[RngState] = None,
) -> Tensor:
    """Two-layer GCN: softmax(A_hat ELU(A_hat X W1 [dropout]) W2)."""
    _check_inputs(params, graph, x)
    cfg = params.config
    rng = rng if rng is not None else RngState(0)
    norm = Tensor(graph.gcn_norm_values[:, None])
    offsets, src = graph.csr_offsets, graph.csr_neighbors
    h = elu(weighted_gather_sum(norm, matmul(x, params.w1), offsets, src))
    h = dropout(h, cfg.dropout, training, rng)
    logits = weighted_gather_sum(norm, matmul(h, params.w2), offsets, src)
    return softmax_rows(logits)


def gat_forward(
    params: GatParams, graph: Graph, x: Tensor, training: bool = False,
    rng: Optional[RngState] = None,
) -> Tensor:
    """Two-layer GAT: concat heads + ELU + dropout, then averaged heads."""
    _check_inputs(params, graph, x)
    cfg = params.config
    rng = rng if rng is not None else RngState(0)
    h = gat_layer(
        params.layers[0], graph, x, concat=True, training=training, rng=rng,
        attn_slope=cfg.attn_slope, attn_dropout=cfg.dropout,
    )
    h = dropout(elu(h), cfg.dropout, training, rng)
    logits = gat_layer(
        params.layers[1], graph, h, concat=False, training=training, rng=rng,
        attn_slope=cfg.attn_slope, attn_dropout=cfg.dropout,
    )
    return softmax_rows(logits)


def _resnet_trunk(
    params: GatResNetParams, graph: Graph, x: Tensor, training: bool, rng: RngState
) -> Tensor:
    """First layer of the GAT-ResNet: concat heads, ELU, dropout."""
    cfg = params.config
    l1 = gat_layer(
        params.layers[0], graph, x, concat=True, training=training, rng=rng,
        attn_slope=cfg.attn_slope, attn_dropout=cfg.dropout,
    )
    return dropout(elu(l1), cfg.dropout, training, rng)


def gat_resnet_forward(
    params: GatResNetParams, graph: Graph, x: Tensor, training: bool = False,
    rng: Optional[RngState] = None,
) -> Tensor:
    """Three GAT layers with a residual sum of the first two layers' outputs.

    With use_skip, the input features are projected by a dedicated weight
    matrix and added to the final layer's logits before the softmax.
    """
    _check_inputs(params, graph, x)
    cfg = params.config
    rng = rng if rng is not None else RngState(0)
    l1 = _resnet_trunk(params, graph, x, training, rng)
    l2 = gat_layer(
        params.layers[1], graph, l1, concat=True, training=training, rng=rng,
        attn_slope=cfg.attn_slope, attn_dropout=cfg.dropout,
    )
    l2 = dropout(elu(l2), cfg.dropout, training, rng)
    residual = add(l1, l2)
    logits = gat_layer(
        params.layers[2], graph, residual, concat=False, training=training, rng=rng,
        attn_slope=cfg.attn_slope, attn_dropout=cfg.dropout,
    )
    if cfg.use_skip:
        logits = add(logits, matmul(x, params.w_skip))
    return softmax_rows(logits)


def embed(params: GatResNetParams, graph: Graph, x: Tensor) -> Tensor:
    """Node embeddings: the first GAT-ResNet layer's output (inference mode).

    Width is heads * hidden (400 for the default configuration); two
    calls with the same inputs are identical since nothing stochastic
    runs at inference.
    """
    if not isinstance(params, GatResNetParams):
        raise ParameterError(
            f"embeddings come from a GAT-ResNet model, got {type(params).__name__}"
        )
    _check_inputs(params, graph, x)
    return _resnet_trunk(params, graph, x, training=False, rng=RngState(0))


MODEL_KINDS = ("gcn", "gat", "gat_resnet")


def model_kind(params: ModelParams) -> str:
    return {
        GcnParams: "gcn",
        GatParams: "gat",
        GatResNetParams: "gat_resnet",
    }[type(params)]


def forward(
    params: ModelParams, graph: Graph, x: Tensor, training: bool = False,
    rng: Optional[RngState] = None,
) -> Tensor:
    """Dispatch to the architecture's forward function."""
    if isinstance(params, GcnParams):
        return gcn_forward(params, graph, x, training, rng)
    if isinstance(params, GatParams):
        return gat_forward(params, graph, x, training, rng)
    return gat_resnet_forward(params, graph, x, training, rng)
