"""Classical baselines: logistic regression and random forest.

Both honor the same 0.3/0.7 class weighting as the graph models:
logistic regression weights its cross-entropy terms, the random forest
uses weighted class counts inside the Gini criterion. Leaf votes and
prediction ties resolve toward licit so degenerate calls never flag a
transaction.

Logistic regression trains with the shared Adam optimizer on a stable
softplus form of the weighted binary cross-entropy. The forest follows
standard CART: greedy Gini splits, midpoint thresholds between adjacent
observed values, recursion until purity, a depth limit, or fewer than
two samples; a node still splits at zero gain as long as both children
are non-empty (XOR needs this). Each tree draws from its own rng stream
split off the seed, so results cannot depend on fitting order.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .autodiff import RngState, Tape, Tensor, add_bias, backward, matmul, record_op
from .errors import DegenerateDataError, ParameterError, ShapeError
from .training import AdamState, adam_step, zero_grads


@dataclass
class LogRegParams:
    weights: Tensor   # d x 1
    bias: Tensor      # 1 x 1


def _softplus(x: np.ndarray) -> np.ndarray:
    return np.log1p(np.exp(-np.abs(x))) + np.maximum(x, 0.0)


def weighted_binary_cross_entropy(
    z: Tensor, y: np.ndarray, weights: tuple, mask: np.ndarray
) -> Tensor:
    """Weight-normalized mean of -[y log sigma(z) + (1-y) log(1-sigma(z))]."""
    if z.cols != 1:
        raise ShapeError(f"logits must be n x 1, got {z.shape}")
    idx = np.flatnonzero(np.asarray(mask, dtype=bool))
    if idx.size == 0:
        raise ParameterError("loss requires at least one eligible row")
    yv = np.asarray(y)[idx].astype(np.float64)
    w = np.where(yv == 1.0, weights[1], weights[0])
    w_total = w.sum()
    zv = z.data[idx, 0]
    per_row = yv * _softplus(-zv) + (1.0 - yv) * _softplus(zv)
    out = Tensor([[(w * per_row).sum() / w_total]])

    def backward_fn(g):
        grad = np.zeros_like(z.data)
        sigma = 1.0 / (1.0 + np.exp(-zv))
        grad[idx, 0] = (w / w_total) * (sigma - yv) * g[0, 0]
        return (grad,)

    return record_op(out, (z,), backward_fn)


def logreg_decision_function(params: LogRegParams, x: np.ndarray) -> Tensor:
    return add_bias(matmul(Tensor(x), params.weights), params.bias)


def logreg_predict_proba(params: LogRegParams, x: np.ndarray) -> np.ndarray:
    """Per-row [p(licit), p(illicit)]."""
    z = logreg_decision_function(params, x).data[:, 0]
    p1 = 1.0 / (1.0 + np.exp(-z))
    return np.column_stack([1.0 - p1, p1])


def logreg_train(
    x: np.ndarray,
    y: np.ndarray,
    mask: np.ndarray,
    epochs: int = 500,
    lr: float = 0.001,
    class_weights: tuple = (0.3, 0.7),
    seed: int = 15,
) -> LogRegParams:
    """Full-batch Adam on the weighted logistic loss, zero-initialized.

    With zero epochs the returned model predicts 0.5 everywhere.
    """
    mask = np.asarray(mask, dtype=bool)
    y_train = np.asarray(y)[mask]
    if y_train.size == 0 or len(np.unique(y_train)) < 2:
        raise DegenerateDataError(
            "logistic regression needs at least one sample of each class"
        )
    params = LogRegParams(
        weights=Tensor(np.zeros((x.shape[1], 1)), grad_enabled=True),
        bias=Tensor(np.zeros((1, 1)), grad_enabled=True),
    )
    tensors = {"weights": params.weights, "bias": params.bias}
    adam = AdamState.for_params(tensors)
    for _ in range(epochs):
        zero_grads(tensors)
        with Tape() as tape:
            z = logreg_decision_function(params, x)
            loss = weighted_binary_cross_entropy(z, y, class_weights, mask)
            backward(loss, tape)
        adam_step(tensors, adam, lr)
    del seed  # training is deterministic; kept for interface symmetry
    return params


def gini_impurity(counts: np.ndarray) -> float:
    """1 - sum of squared class fractions (0 for pure, 0.5 for 50/50)."""
    total = counts.sum()
    if total <= 0:
        return 0.0
    fractions = counts / total
    return float(1.0 - (fractions * fractions).sum())


@dataclass
class DecisionTree:
    """CART tree stored as flat arrays (feature -1 marks a leaf)."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    counts: np.ndarray    # n_nodes x 2 raw class counts

    @property
    def n_nodes(self) -> int:
        return self.feature.shape[0]


def _best_split(x, y, samples, feature_ids, class_weights):
    """Minimal weighted-Gini (feature, threshold) over midpoint candidates.

    Ties keep the first candidate in scan order (feature order as
    sampled, thresholds ascending), so fits are reproducible.
    """
    w = np.asarray(class_weights, dtype=np.float64)
    best_score, best_f, best_thr = np.inf, -1, 0.0
    for f in feature_ids:
        column = x[samples, f]
        order = np.argsort(column, kind="stable")
        values = column[order]
        labels = y[samples][order]
        cuts = np.flatnonzero(values[1:] > values[:-1])
        if cuts.size == 0:
            continue
        # cumulative weighted class counts along the sorted column
        onehot = np.zeros((values.shape[0], 2))
        onehot[np.arange(values.shape[0]), labels] = 1.0
        cum = np.cumsum(onehot * w, axis=0)
        total = cum[-1]
        left = cum[cuts]
        right = total[None, :] - left
        nl = left.sum(axis=1)
        nr = right.sum(axis=1)
        gl = 1.0 - ((left / nl[:, None]) ** 2).sum(axis=1)
        gr = 1.0 - ((right / nr[:, None]) ** 2).sum(axis=1)
        scores = (nl * gl + nr * gr) / (nl + nr)
        pick = int(np.argmin(scores))
        if scores[pick] < best_score:
            best_score = float(scores[pick])
            best_f = int(f)
            best_thr = float(0.5 * (values[cuts[pick]] + values[cuts[pick] + 1]))
    return best_score, best_f, best_thr


def tree_fit(
    x: np.ndarray,
    y: np.ndarray,
    sample_indices: np.ndarray,
    max_features: int,
    max_depth: int | None,
    rng: RngState,
    class_weights: tuple = (0.5, 0.5),
) -> DecisionTree:
    if sample_indices.size == 0:
        raise ParameterError("tree_fit needs a non-empty sample set")
    d = x.shape[1]
    k = min(max_features, d)
    feature, threshold, left, right, counts = [], [], [], [], []

    def grow(samples: np.ndarray, depth: int, path: int) -> int:
        node = len(feature)
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        node_counts = np.bincount(y[samples], minlength=2).astype(np.float64)
        counts.append(node_counts)
        pure = (node_counts > 0).sum() <= 1
        if pure or samples.size < 2 or (max_depth is not None and depth >= max_depth):
            return node
        # candidate features, sampled without replacement from a stream keyed
        # by the node's path: a deeper depth limit then grows the exact same
        # tree further instead of reshuffling the candidates below it
        ids = np.argsort(rng.split(path).uniform(d), kind="stable")[:k]
        score, f, thr = _best_split(x, y, samples, ids, class_weights)
        if f < 0:
            return node
        go_left = x[samples, f] <= thr
        feature[node] = f
        threshold[node] = thr
        left[node] = grow(samples[go_left], depth + 1, 2 * path + 1)
        right[node] = grow(samples[~go_left], depth + 1, 2 * path + 2)
        return node

    grow(np.asarray(sample_indices, dtype=np.int64), 0, 0)
    return DecisionTree(
        feature=np.array(feature, dtype=np.int64),
        threshold=np.array(threshold, dtype=np.float64),
        left=np.array(left, dtype=np.int64),
        right=np.array(right, dtype=np.int64),
        counts=np.array(counts, dtype=np.float64).reshape(-1, 2),
    )


def tree_predict_class(tree: DecisionTree, x: np.ndarray) -> np.ndarray:
    """Leaf-majority class per row; ties vote licit."""
    idx = np.zeros(x.shape[0], dtype=np.int64)
    while True:
        internal = tree.feature[idx] >= 0
        if not internal.any():
            break
        rows = np.flatnonzero(internal)
        nodes = idx[rows]
        go_left = x[rows, tree.feature[nodes]] <= tree.threshold[nodes]
        idx[rows] = np.where(go_left, tree.left[nodes], tree.right[nodes])
    leaf_counts = tree.counts[idx]
    return (leaf_counts[:, 1] > leaf_counts[:, 0]).astype(np.int64)


@dataclass
class RandomForest:
    trees: list = field(default_factory=list)
    n_estimators: int = 50
    max_features: int = 50
    bootstrap: bool = True
    seed: int = 15


def rf_fit(
    x: np.ndarray,
    y: np.ndarray,
    mask: np.ndarray,
    n_estimators: int = 50,
    max_features: int = 50,
    seed: int = 15,
    bootstrap: bool = True,
    max_depth: int | None = None,
    class_weights: tuple = (0.3, 0.7),
) -> RandomForest:
    """Bootstrap-aggregated CART trees, one pre-split rng stream per tree."""
    mask = np.asarray(mask, dtype=bool)
    train_rows = np.flatnonzero(mask)
    if train_rows.size == 0:
        raise ParameterError("random forest needs a non-empty training set")
    root = RngState(seed)
    forest = RandomForest(
        trees=[], n_estimators=n_estimators, max_features=max_features,
        bootstrap=bootstrap, seed=seed,
    )
    for t in range(n_estimators):
        rng = root.split(t)
        if bootstrap:
            draw = (rng.uniform(train_rows.size) * train_rows.size).astype(np.int64)
            samples = train_rows[draw]
        else:
            samples = train_rows
        forest.trees.append(
            tree_fit(x, y, samples, max_features, max_depth, rng, class_weights)
        )
    return forest


def rf_predict(forest: RandomForest, x: np.ndarray) -> np.ndarray:
    """Class probability = fraction of trees voting that class."""
    votes = np.zeros(x.shape[0])
    for tree in forest.trees:
        votes += tree_predict_class(tree, x)
    p1 = votes / len(forest.trees)
    return np.column_stack([1.0 - p1, p1])
