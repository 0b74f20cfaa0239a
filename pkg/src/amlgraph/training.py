"""Weighted-loss full-batch training with Adam and patience-based stopping.

The loss is a weight-normalized mean: each eligible node contributes
w(y) * (-log p(y)) and the sum is divided by the total applied weight, so
scaling all class weights by a positive constant changes nothing. When
the probabilities come straight out of softmax_rows, the loss reuses the
cached log-softmax and differentiates directly w.r.t. the logits — the
exposed probabilities and the loss stay mathematically consistent while
log(eps) never happens.

Early stopping monitors the loss on a validation tail: train-split nodes
whose time step falls in the last `validation_tail` training steps. Those
nodes are excluded from gradient updates; monitoring the test split would
leak the evaluation set and is deliberately not done.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .autodiff import RngState, Tape, Tensor, backward, record_op
from .data import EllipticDataset, Graph, SplitMasks
from .errors import ParameterError, ShapeError
from .models import (
    GatConfig,
    GatResNetConfig,
    GcnConfig,
    ModelParams,
    embed,
    forward,
    init_params,
    named_tensors,
)


@dataclass
class TrainConfig:
    epochs: int = 1000
    lr: float = 0.001
    patience: int = 50
    class_weights: tuple = (0.3, 0.7)  # (licit, illicit)
    seed: int = 15
    validation_tail: int = 5

    def __post_init__(self):
        if self.epochs < 1:
            raise ParameterError(f"epochs must be >= 1, got {self.epochs}")
        if self.lr <= 0:
            raise ParameterError(f"learning rate must be positive, got {self.lr}")
        if not 1 <= self.patience <= self.epochs:
            raise ParameterError(
                f"patience must be in 1..epochs, got {self.patience} (epochs {self.epochs})"
            )
        w0, w1 = self.class_weights
        if w0 <= 0 or w1 <= 0:
            raise ParameterError(f"class weights must be positive, got {self.class_weights}")
        # stored normalized so the record itself sums to 1
        self.class_weights = (w0 / (w0 + w1), w1 / (w0 + w1))
        if self.validation_tail < 0:
            raise ParameterError(f"validation_tail must be >= 0, got {self.validation_tail}")


def weighted_cross_entropy(
    probs: Tensor, labels: np.ndarray, weights: tuple, eligible_mask: np.ndarray
) -> Tensor:
    """Weight-normalized mean of per-node -log p(true class)."""
    labels = np.asarray(labels)
    mask = np.asarray(eligible_mask, dtype=bool)
    if not mask.any():
        raise ParameterError("loss requires at least one eligible node")
    if probs.cols != 2:
        raise ShapeError(f"probabilities must be n x 2, got {probs.shape}")
    idx = np.flatnonzero(mask)
    y = labels[idx]
    if (y < 0).any():
        raise ParameterError("eligible mask selects unlabeled nodes")
    w = np.where(y == 1, weights[1], weights[0])
    w_total = w.sum()

    logits = probs._softmax_logits
    if logits is not None and probs._log_probs is not None:
        log_p = probs._log_probs
        value = -(w * log_p[idx, y]).sum() / w_total
        out = Tensor([[value]])

        def backward_logits(g):
            grad = np.zeros_like(logits.data)
            grad[idx] = probs.data[idx]
            grad[idx, y] -= 1.0
            grad[idx] *= (w / w_total)[:, None]
            return (grad * g[0, 0],)

        return record_op(out, (logits,), backward_logits)

    p_true = probs.data[idx, y]
    value = -(w * np.log(p_true)).sum() / w_total
    out = Tensor([[value]])

    def backward_probs(g):
        grad = np.zeros_like(probs.data)
        grad[idx, y] = -(w / w_total) / p_true
        return (grad * g[0, 0],)

    return record_op(out, (probs,), backward_probs)


@dataclass
class AdamState:
    """Canonical Adam moments, one step counter for the whole parameter set."""

    m: dict
    v: dict
    t: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @staticmethod
    def for_params(tensors: dict) -> "AdamState":
        return AdamState(
            m={k: np.zeros_like(t.data) for k, t in tensors.items()},
            v={k: np.zeros_like(t.data) for k, t in tensors.items()},
        )


def adam_step(tensors: dict, state: AdamState, lr: float) -> None:
    """One bias-corrected Adam update; missing gradients count as zero."""
    state.t += 1
    correction1 = 1.0 - state.beta1**state.t
    correction2 = 1.0 - state.beta2**state.t
    for name, tensor in tensors.items():
        g = tensor.grad if tensor.grad is not None else np.zeros_like(tensor.data)
        if g.shape != tensor.data.shape:
            raise ShapeError(f"gradient shape {g.shape} != parameter shape {tensor.data.shape}")
        m = state.m[name]
        v = state.v[name]
        m *= state.beta1
        m += (1.0 - state.beta1) * g
        v *= state.beta2
        v += (1.0 - state.beta2) * (g * g)
        m_hat = m / correction1
        v_hat = v / correction2
        tensor.data -= lr * m_hat / (np.sqrt(v_hat) + state.eps)


def zero_grads(tensors: dict) -> None:
    for t in tensors.values():
        t.grad = None


@dataclass
class TrainLog:
    entries: list = field(default_factory=list)  # dicts: epoch, train_loss, val_loss
    best_epoch: int = 0
    best_val_loss: float = float("inf")
    stopped_early: bool = False

    def to_dict(self) -> dict:
        return {
            "entries": self.entries,
            "best_epoch": self.best_epoch,
            "best_val_loss": self.best_val_loss,
            "stopped_early": self.stopped_early,
        }


def default_model_config(kind: str, in_dim: int):
    if kind == "gcn":
        return GcnConfig(in_dim=in_dim)
    if kind == "gat":
        return GatConfig(in_dim=in_dim)
    if kind == "gat_resnet":
        return GatResNetConfig(in_dim=in_dim)
    raise ParameterError(f"unknown GNN kind {kind!r}")


def train(
    kind: str,
    graph: Graph,
    dataset: EllipticDataset,
    masks: SplitMasks,
    config: TrainConfig,
    model_config=None,
    features: np.ndarray | None = None,
) -> tuple[ModelParams, TrainLog]:
    """Full-batch training of a GNN with early stopping on the validation tail.

    Returns the parameters from the best validation epoch and the
    per-epoch loss log. Bitwise deterministic given (inputs, seed).
    """
    feats = dataset.features if features is None else features
    if model_config is None:
        model_config = default_model_config(kind, feats.shape[1])
    if not 0 <= config.validation_tail < masks.boundary:
        raise ParameterError(
            f"validation_tail must be < split boundary {masks.boundary}, "
            f"got {config.validation_tail}"
        )
    cut = masks.boundary - config.validation_tail
    fit_mask = masks.train_eligible & (dataset.time_step <= cut)
    val_mask = masks.train_eligible & (dataset.time_step > cut)
    if config.validation_tail == 0:
        val_mask = fit_mask  # no carve-out: monitor the training loss
    if not fit_mask.any():
        raise ParameterError("no labeled training nodes below the validation tail")
    if not val_mask.any():
        raise ParameterError(
            f"validation tail of {config.validation_tail} steps holds no labeled nodes"
        )

    rng = RngState(config.seed)
    params = init_params(model_config, rng)
    tensors = named_tensors(params)
    adam = AdamState.for_params(tensors)
    x = Tensor(feats)
    log = TrainLog()
    best_data = {k: t.data.copy() for k, t in tensors.items()}
    bad_epochs = 0

    for epoch in range(1, config.epochs + 1):
        zero_grads(tensors)
        with Tape() as tape:
            probs = forward(params, graph, x, training=True, rng=rng)
            loss = weighted_cross_entropy(probs, dataset.label, config.class_weights, fit_mask)
            backward(loss, tape)
        adam_step(tensors, adam, config.lr)

        eval_probs = forward(params, graph, x, training=False)
        val_loss = weighted_cross_entropy(
            eval_probs, dataset.label, config.class_weights, val_mask
        ).data[0, 0]
        log.entries.append(
            {"epoch": epoch, "train_loss": float(loss.data[0, 0]), "val_loss": float(val_loss)}
        )
        if val_loss < log.best_val_loss:
            log.best_val_loss = float(val_loss)
            log.best_epoch = epoch
            best_data = {k: t.data.copy() for k, t in tensors.items()}
            bad_epochs = 0
        else:
            bad_epochs += 1
            if bad_epochs >= config.patience:
                log.stopped_early = True
                break

    for name, tensor in tensors.items():
        tensor.data = best_data[name]
    return params, log


def export_embeddings(
    params,
    graph: Graph,
    dataset: EllipticDataset,
    out_path,
    features: np.ndarray | None = None,
) -> int:
    """Write one CSV row per node: txId, then the embedding values.

    Values carry 12 significant digits; a reload agrees within 1e-9.
    Returns the row count.
    """
    feats = dataset.features if features is None else features
    vectors = embed(params, graph, Tensor(feats)).data
    with open(out_path, "w") as f:
        for i in range(dataset.n_nodes):
            row = ",".join(f"{v:.12g}" for v in vectors[i])
            f.write(f"{dataset.tx_ids[i]},{row}\n")
    return dataset.n_nodes
