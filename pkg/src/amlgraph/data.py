"""Elliptic dataset ingestion, graph construction, and splits.

File formats (the public Elliptic layout):

  * features CSV — no header, 167 columns per row: transaction id, then
    166 feature values, the first of which is the time step (1..49).
    Of the 166, the first 94 are "local" features (time step included),
    the remaining 72 aggregated.
  * classes CSV — header ``txId,class`` with class in {"1", "2",
    "unknown"}; "1" = illicit, "2" = licit.
  * edgelist CSV — header ``txId1,txId2``; directed bitcoin flow.

Internally illicit is encoded 1 (the positive class), licit 0 and
unknown -1. Unknown nodes stay in the graph for message passing but are
never loss- or metric-eligible.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from .autodiff.rng import RngState
from .errors import DataFormatError, DataIntegrityError, ParameterError

N_FEATURES = 166
N_LOCAL_FEATURES = 94
N_TIME_STEPS = 49
FEATURE_SETS = ("AF", "LF", "AF+NE", "LF+NE")

LABEL_ILLICIT = 1
LABEL_LICIT = 0
LABEL_UNKNOWN = -1


@dataclass
class EllipticDataset:
    n_nodes: int
    features: np.ndarray          # n x 166 float64; column 0 is the time step
    time_step: np.ndarray         # n int64 in 1..49
    label: np.ndarray             # n int64: 1 illicit, 0 licit, -1 unknown
    edges: np.ndarray             # E x 2 int64 node-index pairs (directed)
    tx_ids: np.ndarray            # n int64 external transaction ids
    tx_id_index: dict = field(repr=False)
    standardized: bool = False

    def fingerprint(self) -> dict:
        return {
            "nodes": int(self.n_nodes),
            "edges": int(self.edges.shape[0]),
            "illicit": int((self.label == LABEL_ILLICIT).sum()),
            "licit": int((self.label == LABEL_LICIT).sum()),
            "unknown": int((self.label == LABEL_UNKNOWN).sum()),
            "time_steps": int(np.unique(self.time_step).shape[0]),
        }


@dataclass
class Graph:
    """Symmetrized CSR adjacency with self-loops, grouped by destination.

    Stored edge e points src -> dst with dst = csr_dst[e]; rows are the
    contiguous spans given by csr_offsets. gcn_norm_values[e] is the
    coefficient of the degree-normalized adjacency (A+I normalized by
    1/sqrt(deg_i * deg_j), degrees counted with the self-loop).
    """

    n_nodes: int
    csr_offsets: np.ndarray
    csr_neighbors: np.ndarray     # source node of each stored edge
    csr_dst: np.ndarray           # destination (row) of each stored edge
    gcn_norm_values: np.ndarray


@dataclass
class SplitMasks:
    boundary: int
    train_mask: np.ndarray        # time_step <= boundary
    test_mask: np.ndarray
    train_eligible: np.ndarray    # in split and labeled
    test_eligible: np.ndarray


def _read_features(path) -> pd.DataFrame:
    try:
        frame = pd.read_csv(path, header=None)
    except pd.errors.ParserError as exc:
        raise DataFormatError(f"{path}: {exc}") from exc
    if frame.shape[1] != N_FEATURES + 1:
        raise DataFormatError(
            f"{path}: expected {N_FEATURES + 1} columns per row, found {frame.shape[1]}"
        )
    values = frame.apply(pd.to_numeric, errors="coerce")
    bad = values.isna().any(axis=1)
    if bad.any():
        line = int(np.argmax(bad.to_numpy())) + 1
        raise DataFormatError(f"{path}: malformed or missing value at line {line}")
    return values


def load_elliptic(features_path, classes_path, edges_path) -> EllipticDataset:
    """Load and fully index the Elliptic CSV triplet."""
    feats = _read_features(features_path)
    tx_ids = feats.iloc[:, 0].to_numpy()
    if not np.array_equal(tx_ids, tx_ids.astype(np.int64)):
        raise DataFormatError(f"{features_path}: transaction ids must be integers")
    tx_ids = tx_ids.astype(np.int64)
    uniq, counts = np.unique(tx_ids, return_counts=True)
    if (counts > 1).any():
        raise DataIntegrityError(
            f"{features_path}: duplicate transaction id {uniq[counts > 1][0]}"
        )
    features = np.ascontiguousarray(feats.iloc[:, 1:].to_numpy(dtype=np.float64))
    time_step = features[:, 0]
    if not np.array_equal(time_step, np.round(time_step)) or (
        time_step.min() < 1 or time_step.max() > N_TIME_STEPS
    ):
        raise DataFormatError(
            f"{features_path}: time steps must be integers in 1..{N_TIME_STEPS}"
        )
    time_step = time_step.astype(np.int64)
    n = tx_ids.shape[0]
    index = {int(t): i for i, t in enumerate(tx_ids)}

    classes = pd.read_csv(classes_path, dtype=str)
    if list(classes.columns) != ["txId", "class"]:
        raise DataFormatError(
            f"{classes_path}: expected header 'txId,class', found {list(classes.columns)}"
        )
    label = np.full(n, LABEL_UNKNOWN, dtype=np.int64)
    seen = set()
    mapping = {"1": LABEL_ILLICIT, "2": LABEL_LICIT, "unknown": LABEL_UNKNOWN}
    for line, (tx, cls) in enumerate(
        zip(classes["txId"].to_numpy(), classes["class"].to_numpy()), start=2
    ):
        if cls not in mapping:
            raise DataFormatError(f"{classes_path}: invalid class {cls!r} at line {line}")
        try:
            node = index[int(tx)]
        except (KeyError, ValueError):
            raise DataIntegrityError(
                f"{classes_path}: class row for unknown transaction id {tx} (line {line})"
            ) from None
        if node in seen:
            raise DataIntegrityError(
                f"{classes_path}: duplicate class row for transaction id {tx} (line {line})"
            )
        seen.add(node)
        label[node] = mapping[cls]

    edge_frame = pd.read_csv(edges_path, dtype=np.int64)
    if list(edge_frame.columns) != ["txId1", "txId2"]:
        raise DataFormatError(
            f"{edges_path}: expected header 'txId1,txId2', found {list(edge_frame.columns)}"
        )
    raw = edge_frame.to_numpy()
    edges = np.empty_like(raw)
    for col in range(2):
        for line, tx in enumerate(raw[:, col], start=2):
            node = index.get(int(tx))
            if node is None:
                raise DataIntegrityError(
                    f"{edges_path}: edge references unknown transaction id {tx} (line {line})"
                )
            edges[line - 2, col] = node

    return EllipticDataset(
        n_nodes=n,
        features=features,
        time_step=time_step,
        label=label,
        edges=edges,
        tx_ids=tx_ids,
        tx_id_index=index,
    )


def write_dataset(dataset: EllipticDataset, features_path, classes_path, edges_path) -> None:
    """Write a dataset back out in the public Elliptic layout."""
    with open(features_path, "w") as f:
        for i in range(dataset.n_nodes):
            row = ",".join(repr(float(v)) for v in dataset.features[i])
            f.write(f"{dataset.tx_ids[i]},{row}\n")
    names = {LABEL_ILLICIT: "1", LABEL_LICIT: "2", LABEL_UNKNOWN: "unknown"}
    with open(classes_path, "w") as f:
        f.write("txId,class\n")
        for i in range(dataset.n_nodes):
            f.write(f"{dataset.tx_ids[i]},{names[int(dataset.label[i])]}\n")
    with open(edges_path, "w") as f:
        f.write("txId1,txId2\n")
        for a, b in dataset.edges:
            f.write(f"{dataset.tx_ids[a]},{dataset.tx_ids[b]}\n")


def build_graph(dataset: EllipticDataset, symmetrize: bool = True) -> Graph:
    """CSR adjacency with self-loops added, duplicates collapsed.

    With symmetrize (default) each directed edge is stored both ways, so
    the normalized matrix is symmetric. Degrees count the self-loop.
    """
    n = dataset.n_nodes
    e = dataset.edges
    parts = [e]
    if symmetrize and e.shape[0]:
        parts.append(e[:, ::-1])
    loops = np.stack([np.arange(n, dtype=np.int64)] * 2, axis=1)
    parts.append(loops)
    all_edges = np.concatenate(parts, axis=0)
    # unique over (dst, src) both dedupes and produces the dst-grouped layout
    stored = np.unique(all_edges[:, ::-1], axis=0)
    dst = np.ascontiguousarray(stored[:, 0])
    src = np.ascontiguousarray(stored[:, 1])
    offsets = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(dst, minlength=n), out=offsets[1:])
    deg = np.diff(offsets).astype(np.float64)
    norm = 1.0 / np.sqrt(deg[dst] * deg[src])
    return Graph(
        n_nodes=n,
        csr_offsets=offsets,
        csr_neighbors=src,
        csr_dst=dst,
        gcn_norm_values=norm,
    )


def temporal_split(dataset: EllipticDataset, boundary: int = 34) -> SplitMasks:
    """Train on time steps <= boundary, test on the rest."""
    if not 1 <= boundary < N_TIME_STEPS:
        raise ParameterError(
            f"split boundary must be in 1..{N_TIME_STEPS - 1}, got {boundary}"
        )
    train = dataset.time_step <= boundary
    labeled = dataset.label != LABEL_UNKNOWN
    return SplitMasks(
        boundary=boundary,
        train_mask=train,
        test_mask=~train,
        train_eligible=train & labeled,
        test_eligible=~train & labeled,
    )


@dataclass
class FeatureScaler:
    """Per-feature z-score statistics recorded from the train split."""

    mean: np.ndarray
    std: np.ndarray               # 1.0 for degenerate (std < 1e-12) columns

    def transform(self, features: np.ndarray) -> np.ndarray:
        return (features - self.mean) / self.std


def fit_scaler(matrix: np.ndarray, train_mask: np.ndarray) -> FeatureScaler:
    """Z-score statistics from the masked rows only.

    Degenerate columns (train std below 1e-12) get std 1.0, so they are
    centered but not scaled.
    """
    train_mask = np.asarray(train_mask, dtype=bool)
    if not train_mask.any():
        raise ParameterError("standardization requires a non-empty train split")
    rows = matrix[train_mask]
    mean = rows.mean(axis=0)
    std = rows.std(axis=0)
    return FeatureScaler(mean=mean, std=np.where(std < 1e-12, 1.0, std))


def standardize_features(dataset: EllipticDataset, masks: SplitMasks) -> FeatureScaler:
    """Z-score dataset.features in place using train-split statistics only.

    A second call is rejected: the recorded statistics would no longer
    describe the stored values.
    """
    if dataset.standardized:
        raise ParameterError("features are already standardized")
    scaler = fit_scaler(dataset.features, masks.train_mask)
    dataset.features = scaler.transform(dataset.features)
    dataset.standardized = True
    return scaler


def select_features(
    features: np.ndarray, feature_set: str, embeddings: np.ndarray | None = None
) -> np.ndarray:
    """Materialize one of the AF / LF / AF+NE / LF+NE feature matrices."""
    if feature_set not in FEATURE_SETS:
        raise ParameterError(f"unknown feature set {feature_set!r}; use one of {FEATURE_SETS}")
    base = features if feature_set.startswith("AF") else features[:, :N_LOCAL_FEATURES]
    if feature_set.endswith("+NE"):
        if embeddings is None:
            raise ParameterError(f"feature set {feature_set} requires node embeddings")
        if embeddings.shape[0] != features.shape[0]:
            raise DataIntegrityError(
                f"embedding rows ({embeddings.shape[0]}) do not match node count ({features.shape[0]})"
            )
        return np.concatenate([base, embeddings], axis=1)
    return np.ascontiguousarray(base)


def synthetic_graph(
    n_licit: int,
    n_illicit: int,
    separation: float,
    edge_density: float,
    seed: int,
    n_informative: int = 8,
) -> EllipticDataset:
    """Two-cluster synthetic dataset in the Elliptic schema (test fixture).

    Features are standard normal with `n_informative` columns shifted by
    +-separation/2 according to class; edges are homophilous (cross-class
    pairs get a tenth of the density). Time steps cycle 1..49 so any
    split boundary leaves both sides populated. Deterministic per seed.
    """
    if n_licit < 1 or n_illicit < 1:
        raise ParameterError("both class sizes must be positive")
    n = n_licit + n_illicit
    rng = RngState(seed)
    # interleave classes so the time-step cycle covers both everywhere
    major, minor = (LABEL_LICIT, LABEL_ILLICIT) if n_licit >= n_illicit else (LABEL_ILLICIT, LABEL_LICIT)
    n_minor = min(n_licit, n_illicit)
    label = np.full(n, major, dtype=np.int64)
    label[np.linspace(0, n - 1, n_minor).astype(np.int64)] = minor

    time_step = (np.arange(n) % N_TIME_STEPS + 1).astype(np.int64)
    features = rng.normal(n * N_FEATURES).reshape(n, N_FEATURES)
    sign = np.where(label == LABEL_ILLICIT, 1.0, -1.0)
    cols = slice(1, 1 + n_informative)
    features[:, cols] += (separation / 2.0) * sign[:, None]
    features[:, 0] = time_step

    edges = []
    u = rng.uniform(n * (n - 1) // 2)
    k = 0
    for i in range(n):
        for j in range(i + 1, n):
            p = edge_density if label[i] == label[j] else edge_density * 0.1
            if u[k] < p:
                edges.append((i, j))
            k += 1
    edge_arr = np.array(edges, dtype=np.int64).reshape(-1, 2)
    tx_ids = np.arange(1000, 1000 + n, dtype=np.int64)
    return EllipticDataset(
        n_nodes=n,
        features=features,
        time_step=time_step,
        label=label,
        edges=edge_arr,
        tx_ids=tx_ids,
        tx_id_index={int(t): i for i, t in enumerate(tx_ids)},
    )


def subsample_earliest(dataset: EllipticDataset, max_nodes: int) -> EllipticDataset:
    """Induced subgraph on the max_nodes nodes with the earliest time steps."""
    if max_nodes >= dataset.n_nodes:
        return dataset
    if max_nodes < 1:
        raise ParameterError(f"max_nodes must be positive, got {max_nodes}")
    order = np.lexsort((np.arange(dataset.n_nodes), dataset.time_step))
    keep = np.sort(order[:max_nodes])
    remap = np.full(dataset.n_nodes, -1, dtype=np.int64)
    remap[keep] = np.arange(max_nodes)
    kept_edges = dataset.edges[(remap[dataset.edges] >= 0).all(axis=1)]
    tx_ids = dataset.tx_ids[keep]
    return EllipticDataset(
        n_nodes=max_nodes,
        features=np.ascontiguousarray(dataset.features[keep]),
        time_step=dataset.time_step[keep],
        label=dataset.label[keep],
        edges=remap[kept_edges],
        tx_ids=tx_ids,
        tx_id_index={int(t): i for i, t in enumerate(tx_ids)},
        standardized=dataset.standardized,
    )


def load_embeddings_csv(path, dataset: EllipticDataset) -> np.ndarray:
    """Load an exported embedding CSV aligned to this dataset's node order."""
    frame = pd.read_csv(path, header=None)
    ids = frame.iloc[:, 0].to_numpy(dtype=np.int64)
    values = frame.iloc[:, 1:].to_numpy(dtype=np.float64)
    rows = np.full(dataset.n_nodes, -1, dtype=np.int64)
    for r, tx in enumerate(ids):
        node = dataset.tx_id_index.get(int(tx))
        if node is not None:
            rows[node] = r
    if (rows < 0).any():
        missing = dataset.tx_ids[rows < 0][0]
        raise DataIntegrityError(f"{path}: no embedding for transaction id {missing}")
    return np.ascontiguousarray(values[rows])
