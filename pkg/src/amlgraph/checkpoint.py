"""Named-tensor checkpoint container.

Layout (all integers little-endian):

    bytes 0..3    magic b"AGCK"
    bytes 4..7    u32 container format version (currently 1)
    bytes 8..15   u64 header length in bytes
    header        UTF-8 JSON: metadata plus an ordered tensor directory
                  [{"name", "shape", "dtype"}, ...]
    payload       raw array bytes (little-endian, C order), concatenated
                  in directory order

The writer is fully deterministic: identical inputs produce identical
bytes (no timestamps, sorted JSON keys). float64 and int64 arrays are
supported; shapes are arbitrary.
"""

from __future__ import annotations

import json
import struct

import numpy as np

from .autodiff import Tensor
from .baselines import DecisionTree, LogRegParams, RandomForest
from .data import FeatureScaler
from .errors import CheckpointFormatError
from .models import (
    GatConfig,
    GatHeadParams,
    GatParams,
    GatResNetConfig,
    GatResNetParams,
    GcnConfig,
    GcnParams,
    named_tensors,
)

MAGIC = b"AGCK"
FORMAT_VERSION = 1
_DTYPES = {"float64": "<f8", "int64": "<i8"}


def save_container(path, meta: dict, arrays: dict) -> None:
    directory = []
    for name, arr in arrays.items():
        arr = np.ascontiguousarray(arr)
        if arr.dtype == np.float64:
            dtype = "float64"
        elif arr.dtype == np.int64:
            dtype = "int64"
        else:
            raise CheckpointFormatError(f"unsupported dtype {arr.dtype} for {name!r}")
        directory.append({"name": name, "shape": list(arr.shape), "dtype": dtype})
    header = dict(meta)
    header["format_version"] = FORMAT_VERSION
    header["tensors"] = directory
    blob = json.dumps(header, sort_keys=True).encode("utf-8")
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<I", FORMAT_VERSION))
        f.write(struct.pack("<Q", len(blob)))
        f.write(blob)
        for name, arr in arrays.items():
            dtype = _DTYPES["float64" if arr.dtype == np.float64 else "int64"]
            f.write(np.ascontiguousarray(arr).astype(dtype, copy=False).tobytes())


def load_container(path) -> tuple[dict, dict]:
    with open(path, "rb") as f:
        raw = f.read()
    if len(raw) < 16 or raw[:4] != MAGIC:
        raise CheckpointFormatError(f"{path}: not an amlgraph checkpoint")
    (version,) = struct.unpack("<I", raw[4:8])
    if version != FORMAT_VERSION:
        raise CheckpointFormatError(
            f"{path}: container version {version} is not supported (expected {FORMAT_VERSION})"
        )
    (header_len,) = struct.unpack("<Q", raw[8:16])
    if len(raw) < 16 + header_len:
        raise CheckpointFormatError(f"{path}: truncated header")
    try:
        meta = json.loads(raw[16 : 16 + header_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CheckpointFormatError(f"{path}: corrupt header ({exc})") from exc
    arrays = {}
    cursor = 16 + header_len
    for entry in meta.get("tensors", []):
        shape = tuple(entry["shape"])
        count = int(np.prod(shape)) if shape else 1
        nbytes = count * 8
        if len(raw) < cursor + nbytes:
            raise CheckpointFormatError(f"{path}: truncated payload at {entry['name']!r}")
        arr = np.frombuffer(raw, dtype=_DTYPES[entry["dtype"]], count=count, offset=cursor)
        arrays[entry["name"]] = arr.astype(entry["dtype"]).reshape(shape)
        cursor += nbytes
    return meta, arrays


def _config_to_dict(config) -> dict:
    return {k: getattr(config, k) for k in config.__dataclass_fields__}


_MODEL_CONFIGS = {"gcn": GcnConfig, "gat": GatConfig, "gat_resnet": GatResNetConfig}


def save_model_checkpoint(path, kind: str, model, scaler: FeatureScaler, meta: dict) -> None:
    """Serialize a trained model (any kind) plus its feature scaler."""
    arrays: dict[str, np.ndarray] = {}
    header = dict(meta)
    header["kind"] = kind
    if kind in _MODEL_CONFIGS:
        header["model_config"] = _config_to_dict(model.config)
        for name, tensor in named_tensors(model).items():
            arrays[name] = tensor.data
    elif kind == "logreg":
        arrays["weights"] = model.weights.data
        arrays["bias"] = model.bias.data
    elif kind == "random_forest":
        header["model_config"] = {
            "n_estimators": model.n_estimators,
            "max_features": model.max_features,
            "bootstrap": model.bootstrap,
            "seed": model.seed,
        }
        offsets = np.zeros(len(model.trees) + 1, dtype=np.int64)
        np.cumsum([t.n_nodes for t in model.trees], out=offsets[1:])
        arrays["trees.offsets"] = offsets
        arrays["trees.feature"] = np.concatenate([t.feature for t in model.trees])
        arrays["trees.threshold"] = np.concatenate([t.threshold for t in model.trees])
        arrays["trees.left"] = np.concatenate([t.left for t in model.trees])
        arrays["trees.right"] = np.concatenate([t.right for t in model.trees])
        arrays["trees.counts"] = np.concatenate([t.counts for t in model.trees], axis=0)
    else:
        raise CheckpointFormatError(f"unknown model kind {kind!r}")
    arrays["scaler.mean"] = scaler.mean
    arrays["scaler.std"] = scaler.std
    save_container(path, header, arrays)


def load_model_checkpoint(path):
    """Returns (meta, model, scaler); the inverse of save_model_checkpoint."""
    meta, arrays = load_container(path)
    kind = meta.get("kind")
    try:
        scaler = FeatureScaler(mean=arrays["scaler.mean"], std=arrays["scaler.std"])
        if kind in _MODEL_CONFIGS:
            config = _MODEL_CONFIGS[kind](**meta["model_config"])
            if kind == "gcn":
                model = GcnParams(
                    config=config,
                    w1=Tensor(arrays["layer1.W"], grad_enabled=True),
                    w2=Tensor(arrays["layer2.W"], grad_enabled=True),
                )
            else:
                n_layers = config.n_layers
                layers = []
                for l in range(1, n_layers + 1):
                    layers.append(
                        [
                            GatHeadParams(
                                W=Tensor(arrays[f"layer{l}.head{h}.W"], grad_enabled=True),
                                a_dst=Tensor(arrays[f"layer{l}.head{h}.a_dst"], grad_enabled=True),
                                a_src=Tensor(arrays[f"layer{l}.head{h}.a_src"], grad_enabled=True),
                            )
                            for h in range(1, config.heads + 1)
                        ]
                    )
                if kind == "gat":
                    model = GatParams(config=config, layers=layers)
                else:
                    w_skip = Tensor(arrays["skip.W"], grad_enabled=True) if config.use_skip else None
                    model = GatResNetParams(config=config, layers=layers, w_skip=w_skip)
        elif kind == "logreg":
            model = LogRegParams(
                weights=Tensor(arrays["weights"], grad_enabled=True),
                bias=Tensor(arrays["bias"], grad_enabled=True),
            )
        elif kind == "random_forest":
            cfg = meta["model_config"]
            offsets = arrays["trees.offsets"]
            trees = []
            for t in range(offsets.shape[0] - 1):
                lo, hi = offsets[t], offsets[t + 1]
                trees.append(
                    DecisionTree(
                        feature=arrays["trees.feature"][lo:hi],
                        threshold=arrays["trees.threshold"][lo:hi],
                        left=arrays["trees.left"][lo:hi],
                        right=arrays["trees.right"][lo:hi],
                        counts=arrays["trees.counts"][lo:hi],
                    )
                )
            model = RandomForest(
                trees=trees, n_estimators=cfg["n_estimators"],
                max_features=cfg["max_features"], bootstrap=cfg["bootstrap"],
                seed=cfg["seed"],
            )
        else:
            raise CheckpointFormatError(f"{path}: unknown model kind {kind!r}")
    except KeyError as exc:
        raise CheckpointFormatError(f"{path}: missing checkpoint field {exc}") from exc
    return meta, model, scaler
