"""Experiment configuration files and run manifests.

Config files are INI-style: flat typed key=value entries under section
headers. Unknown sections or keys are hard errors — a silently ignored
hyperparameter typo would corrupt any reproduction claim.

    [data]
    features = path/to/elliptic_txs_features.csv   ; or data_dir = ...
    classes = ...
    edges = ...
    embedding_source = runs/resnet/embeddings.csv  ; required for +NE sets

    [experiment]
    model = gat_resnet          ; logreg | random_forest | gcn | gat | gat_resnet
    feature_set = AF            ; AF | LF | AF+NE | LF+NE
    split_boundary = 34
    seed = 15
    out_dir = runs/gat_resnet

    [train]
    epochs = 1000
    lr = 0.001
    patience = 50
    licit_weight = 0.3
    illicit_weight = 0.7
    validation_tail = 5

    [model]                     ; keys checked against the model kind
    hidden = 100
    heads = 4
    dropout = 0.5
    use_skip = true
    attn_slope = 0.2
    n_estimators = 50           ; random_forest only
    max_features = 50
    bootstrap = true
    max_depth =                 ; empty means unlimited
"""

from __future__ import annotations

import configparser
import os
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from .data import FEATURE_SETS
from .errors import ConfigError

MODEL_CHOICES = ("logreg", "random_forest", "gcn", "gat", "gat_resnet")
DATA_DIR_ENV = "AMLGRAPH_DATA_DIR"
STANDARD_FILES = {
    "features": "elliptic_txs_features.csv",
    "classes": "elliptic_txs_classes.csv",
    "edges": "elliptic_txs_edgelist.csv",
}

GNN_KINDS = ("gcn", "gat", "gat_resnet")
_DEFAULT_HEADS = {"gat": 8, "gat_resnet": 4}


def _parse_bool(raw: str) -> bool:
    lowered = raw.strip().lower()
    if lowered in ("true", "1", "yes", "on"):
        return True
    if lowered in ("false", "0", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {raw!r}")


@dataclass
class ExperimentConfig:
    model: str = "gat_resnet"
    feature_set: str = "AF"
    split_boundary: int = 34
    seed: int = 15
    out_dir: str = "runs/experiment"
    max_nodes: int | None = None

    features: str | None = None
    classes: str | None = None
    edges: str | None = None
    data_dir: str | None = None
    embedding_source: str | None = None

    epochs: int = 1000
    lr: float = 0.001
    patience: int = 50
    licit_weight: float = 0.3
    illicit_weight: float = 0.7
    validation_tail: int = 5

    hidden: int = 100
    heads: int | None = None
    dropout: float = 0.5
    use_skip: bool = True
    attn_slope: float = 0.2

    n_estimators: int = 50
    max_features: int = 50
    bootstrap: bool = True
    max_depth: int | None = None

    explicit_keys: set = field(default_factory=set, repr=False)

    def validate(self) -> None:
        if self.model not in MODEL_CHOICES:
            raise ConfigError(f"unknown model {self.model!r}; choose from {MODEL_CHOICES}")
        if self.feature_set not in FEATURE_SETS:
            raise ConfigError(
                f"unknown feature_set {self.feature_set!r}; choose from {FEATURE_SETS}"
            )
        if self.feature_set.endswith("+NE") and not self.embedding_source:
            raise ConfigError(
                f"feature_set {self.feature_set} requires data.embedding_source"
            )
        gnn_only = {"hidden", "dropout", "attn_slope", "heads", "use_skip"}
        forest_only = {"n_estimators", "max_features", "bootstrap", "max_depth"}
        if self.model not in GNN_KINDS:
            bad = self.explicit_keys & gnn_only
            if bad:
                raise ConfigError(f"{sorted(bad)} do not apply to model {self.model!r}")
        if self.model == "gcn" and "heads" in self.explicit_keys:
            raise ConfigError("heads does not apply to the GCN")
        if self.model != "gat_resnet" and "use_skip" in self.explicit_keys:
            raise ConfigError("use_skip applies only to gat_resnet")
        if self.model != "random_forest":
            bad = self.explicit_keys & forest_only
            if bad:
                raise ConfigError(f"{sorted(bad)} apply only to random_forest")
        if self.heads is None:
            self.heads = _DEFAULT_HEADS.get(self.model, 1)

    def resolve_paths(self) -> tuple[str, str, str]:
        """Dataset file locations: explicit paths beat data_dir beats env."""
        if self.features and self.classes and self.edges:
            return self.features, self.classes, self.edges
        base = self.data_dir or os.environ.get(DATA_DIR_ENV)
        if not base:
            raise ConfigError(
                "no dataset location: set data.features/classes/edges, data.data_dir, "
                f"or the {DATA_DIR_ENV} environment variable"
            )
        root = Path(base)
        return (
            self.features or str(root / STANDARD_FILES["features"]),
            self.classes or str(root / STANDARD_FILES["classes"]),
            self.edges or str(root / STANDARD_FILES["edges"]),
        )

    def echo(self) -> dict:
        keys = [
            "model", "feature_set", "split_boundary", "seed", "max_nodes",
            "embedding_source", "epochs", "lr", "patience", "licit_weight",
            "illicit_weight", "validation_tail", "hidden", "heads", "dropout",
            "use_skip", "attn_slope", "n_estimators", "max_features",
            "bootstrap", "max_depth",
        ]
        return {k: getattr(self, k) for k in keys}


_SCHEMA = {
    "data": {
        "features": str, "classes": str, "edges": str, "data_dir": str,
        "embedding_source": str,
    },
    "experiment": {
        "model": str, "feature_set": str, "split_boundary": int, "seed": int,
        "out_dir": str, "max_nodes": int,
    },
    "train": {
        "epochs": int, "lr": float, "patience": int, "licit_weight": float,
        "illicit_weight": float, "validation_tail": int,
    },
    "model": {
        "hidden": int, "heads": int, "dropout": float, "use_skip": _parse_bool,
        "attn_slope": float, "n_estimators": int, "max_features": int,
        "bootstrap": _parse_bool, "max_depth": int,
    },
}


def load_config(path) -> ExperimentConfig:
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    read = parser.read(path)
    if not read:
        raise ConfigError(f"config file not found: {path}")
    config = ExperimentConfig()
    for section in parser.sections():
        if section not in _SCHEMA:
            raise ConfigError(f"{path}: unknown section [{section}]")
        for key, raw in parser.items(section):
            if key not in _SCHEMA[section]:
                raise ConfigError(f"{path}: unknown key {key!r} in [{section}]")
            raw = raw.strip()
            if raw == "":
                continue  # explicit empty means "keep the default"
            caster = _SCHEMA[section][key]
            try:
                value = caster(raw)
            except ValueError as exc:
                raise ConfigError(f"{path}: bad value for {section}.{key}: {exc}") from exc
            setattr(config, key, value)
            config.explicit_keys.add(key)
    config.validate()
    return config


@dataclass
class RunManifest:
    config: dict
    dataset_fingerprint: dict
    artifacts: dict = field(default_factory=dict)
    started: str = ""
    finished: str = ""
    format_version: int = 1

    def start(self) -> None:
        self.started = datetime.now(timezone.utc).isoformat()

    def finish(self) -> None:
        self.finished = datetime.now(timezone.utc).isoformat()

    def to_dict(self) -> dict:
        return {
            "format_version": self.format_version,
            "kind": "run_manifest",
            "config": self.config,
            "dataset_fingerprint": self.dataset_fingerprint,
            "artifacts": self.artifacts,
            "started": self.started,
            "finished": self.finished,
        }
