"""Confusion-matrix metrics for imbalanced binary classification.

Illicit (label 1) is the positive class throughout. Argmax ties predict
licit, biasing degenerate ties away from false accusations. Undefined
ratios follow the conservative zero convention: precision/recall/F1 are
0 on a 0/0, MCC is 0 when any marginal is empty.

Micro-averaged F1 pools TP/FP/FN across both classes one-vs-rest; for
single-label binary classification that equals plain accuracy, so the
report carries the value under both names.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .autodiff.tensor import Tensor
from .errors import ParameterError


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    tn: int
    fp: int
    fn: int

    @property
    def total(self) -> int:
        return self.tp + self.tn + self.fp + self.fn

    def to_dict(self) -> dict:
        return {"tp": self.tp, "tn": self.tn, "fp": self.fp, "fn": self.fn}


@dataclass(frozen=True)
class MetricsReport:
    precision: float
    recall: float
    f1: float
    micro_avg_f1: float
    accuracy: float
    mcc: float
    confusion: ConfusionMatrix
    model: str = ""
    feature_set: str = ""
    seed: int = 0

    def to_dict(self) -> dict:
        return {
            "model": self.model,
            "feature_set": self.feature_set,
            "seed": self.seed,
            "confusion": self.confusion.to_dict(),
            "metrics": {
                "precision": self.precision,
                "recall": self.recall,
                "f1": self.f1,
                "micro_avg_f1": self.micro_avg_f1,
                "accuracy": self.accuracy,
                "mcc": self.mcc,
            },
        }

    @staticmethod
    def from_dict(d: dict) -> "MetricsReport":
        m, c = d["metrics"], d["confusion"]
        return MetricsReport(
            precision=m["precision"], recall=m["recall"], f1=m["f1"],
            micro_avg_f1=m["micro_avg_f1"], accuracy=m["accuracy"], mcc=m["mcc"],
            confusion=ConfusionMatrix(tp=c["tp"], tn=c["tn"], fp=c["fp"], fn=c["fn"]),
            model=d.get("model", ""), feature_set=d.get("feature_set", ""),
            seed=d.get("seed", 0),
        )


def metrics_from_confusion(cm: ConfusionMatrix) -> tuple:
    """(precision, recall, f1, micro_f1, accuracy, mcc) with zero conventions.

    Counts enter the MCC product as Python ints, so the four-way product
    cannot overflow.
    """
    tp, tn, fp, fn = int(cm.tp), int(cm.tn), int(cm.fp), int(cm.fn)
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2.0 * precision * recall / (precision + recall) if precision + recall else 0.0
    # one-vs-rest pooling over both classes
    pooled_tp = tp + tn
    pooled_fp = fp + fn
    pooled_fn = fn + fp
    micro_p = pooled_tp / (pooled_tp + pooled_fp) if pooled_tp + pooled_fp else 0.0
    micro_r = pooled_tp / (pooled_tp + pooled_fn) if pooled_tp + pooled_fn else 0.0
    micro_f1 = 2.0 * micro_p * micro_r / (micro_p + micro_r) if micro_p + micro_r else 0.0
    total = cm.total
    accuracy = (tp + tn) / total if total else 0.0
    denom = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn)
    mcc = (tp * tn - fp * fn) / math.sqrt(denom) if denom else 0.0
    return precision, recall, f1, micro_f1, accuracy, mcc


def evaluate(
    probs,
    labels: np.ndarray,
    mask: np.ndarray,
    model: str = "",
    feature_set: str = "",
    seed: int = 0,
) -> MetricsReport:
    """Score argmax predictions (ties -> licit) on the masked labeled nodes."""
    p = probs.data if isinstance(probs, Tensor) else np.asarray(probs, dtype=np.float64)
    labels = np.asarray(labels)
    mask = np.asarray(mask, dtype=bool) & (labels >= 0)
    if not mask.any():
        raise ParameterError("evaluation mask selects no labeled nodes")
    pred = (p[mask, 1] > p[mask, 0]).astype(np.int64)
    truth = labels[mask]
    cm = ConfusionMatrix(
        tp=int(((pred == 1) & (truth == 1)).sum()),
        tn=int(((pred == 0) & (truth == 0)).sum()),
        fp=int(((pred == 1) & (truth == 0)).sum()),
        fn=int(((pred == 0) & (truth == 1)).sum()),
    )
    precision, recall, f1, micro_f1, accuracy, mcc = metrics_from_confusion(cm)
    return MetricsReport(
        precision=precision, recall=recall, f1=f1, micro_avg_f1=micro_f1,
        accuracy=accuracy, mcc=mcc, confusion=cm,
        model=model, feature_set=feature_set, seed=seed,
    )
