"""Command-line interface.

Verbs: validate, train, evaluate, compare, embed. Every command is
deterministic given (config, seed, input files); artifacts are identical
across repeated runs except for manifest timestamps.

Exit codes: 0 success, 2 configuration error, 3 data/format error,
4 compute error, 5 I/O error. Failures print a single machine-parseable
line ``error: <category>: <message>`` to stderr.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import __version__, kernels
from .autodiff import Tensor
from .baselines import logreg_predict_proba, logreg_train, rf_fit, rf_predict
from .checkpoint import load_model_checkpoint, save_model_checkpoint
from .config import (
    DATA_DIR_ENV,
    ExperimentConfig,
    RunManifest,
    load_config,
)
from .data import (
    build_graph,
    fit_scaler,
    load_elliptic,
    load_embeddings_csv,
    select_features,
    subsample_earliest,
    temporal_split,
)
from .errors import (
    CheckpointFormatError,
    ConfigError,
    DataFormatError,
    DataIntegrityError,
    DegenerateDataError,
    DomainError,
    HarnessError,
    ParameterError,
    ShapeError,
)
from .metrics import evaluate
from .models import GatConfig, GatResNetConfig, GcnConfig, forward
from .reports import (
    build_report,
    comparison_table,
    dump_json,
    mcc_bars_csv,
    radar_csv,
    read_report,
    write_report,
)
from .training import TrainConfig, export_embeddings, train

PUBLISHED_STATS = {
    "nodes": 203_769,
    "edges": 234_355,
    "illicit": 4_545,
    "licit": 42_019,
    "time_steps": 49,
}

EXIT_CONFIG, EXIT_DATA, EXIT_COMPUTE, EXIT_IO = 2, 3, 4, 5


def _say(args, *lines) -> None:
    if not getattr(args, "quiet", False):
        for line in lines:
            print(line)


def _add_data_args(sp) -> None:
    sp.add_argument("--features", help="features CSV path")
    sp.add_argument("--classes", help="classes CSV path")
    sp.add_argument("--edges", help="edgelist CSV path")
    sp.add_argument(
        "--data-dir",
        help=f"directory with the standard Elliptic file names (default ${DATA_DIR_ENV})",
    )


def _data_config(args) -> ExperimentConfig:
    cfg = ExperimentConfig()
    cfg.features, cfg.classes, cfg.edges = args.features, args.classes, args.edges
    cfg.data_dir = args.data_dir
    return cfg


def _load_dataset(config: ExperimentConfig):
    paths = config.resolve_paths()
    dataset = load_elliptic(*paths)
    if config.max_nodes is not None:
        dataset = subsample_earliest(dataset, config.max_nodes)
    return dataset, paths


def cmd_validate(args) -> int:
    dataset, paths = _load_dataset(_data_config(args))
    fp = dataset.fingerprint()
    for key in ("nodes", "edges", "illicit", "licit", "unknown", "time_steps"):
        print(f"{key}: {fp[key]}")
    for key, want in PUBLISHED_STATS.items():
        if fp[key] != want:
            print(f"warning: {key} count {fp[key]} differs from the published {want}")
    return 0


def _model_config_for(config: ExperimentConfig, in_dim: int):
    common = dict(in_dim=in_dim, hidden=config.hidden, out_dim=2, dropout=config.dropout)
    if config.model == "gcn":
        return GcnConfig(**common)
    if config.model == "gat":
        return GatConfig(**common, heads=config.heads, attn_slope=config.attn_slope)
    return GatResNetConfig(
        **common, heads=config.heads, attn_slope=config.attn_slope,
        use_skip=config.use_skip,
    )


def _select_and_scale(config, dataset, masks, scaler=None):
    embeddings = None
    if config.feature_set.endswith("+NE"):
        if not config.embedding_source:
            raise ConfigError(f"feature_set {config.feature_set} requires an embedding source")
        embeddings = load_embeddings_csv(config.embedding_source, dataset)
    x = select_features(dataset.features, config.feature_set, embeddings)
    if scaler is None:
        scaler = fit_scaler(x, masks.train_mask)
    if scaler.mean.shape[0] != x.shape[1]:
        raise DataIntegrityError(
            f"checkpoint expects {scaler.mean.shape[0]}-wide features, got {x.shape[1]}"
        )
    return scaler.transform(x), scaler


def _predict(kind, model, graph, x) -> np.ndarray:
    if kind in ("gcn", "gat", "gat_resnet"):
        return forward(model, graph, Tensor(x), training=False).data
    if kind == "logreg":
        return logreg_predict_proba(model, x)
    return rf_predict(model, x)


def run_training(config: ExperimentConfig) -> dict:
    """The full train pipeline; returns the manifest dictionary."""
    manifest = RunManifest(config=config.echo(), dataset_fingerprint={})
    manifest.start()
    dataset, _ = _load_dataset(config)
    manifest.dataset_fingerprint = dataset.fingerprint()
    masks = temporal_split(dataset, config.split_boundary)
    x, scaler = _select_and_scale(config, dataset, masks)

    class_weights = (config.licit_weight, config.illicit_weight)
    train_log = None
    if config.model in ("gcn", "gat", "gat_resnet"):
        train_cfg = TrainConfig(
            epochs=config.epochs, lr=config.lr, patience=config.patience,
            class_weights=class_weights, seed=config.seed,
            validation_tail=config.validation_tail,
        )
        graph = build_graph(dataset)
        model, log = train(
            config.model, graph, dataset, masks, train_cfg,
            model_config=_model_config_for(config, x.shape[1]), features=x,
        )
        train_log = log.to_dict()
    elif config.model == "logreg":
        graph = None
        model = logreg_train(
            x, dataset.label, masks.train_eligible, epochs=config.epochs,
            lr=config.lr, class_weights=class_weights, seed=config.seed,
        )
    else:
        graph = None
        model = rf_fit(
            x, dataset.label, masks.train_eligible,
            n_estimators=config.n_estimators, max_features=config.max_features,
            seed=config.seed, bootstrap=config.bootstrap,
            max_depth=config.max_depth, class_weights=class_weights,
        )

    probs = _predict(config.model, model, graph, x)
    results = {
        split: evaluate(
            probs, dataset.label, mask,
            model=config.model, feature_set=config.feature_set, seed=config.seed,
        )
        for split, mask in (
            ("train", masks.train_eligible), ("test", masks.test_eligible),
        )
    }

    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    ckpt_path = out_dir / "checkpoint.agck"
    report_path = out_dir / "report.json"
    manifest_path = out_dir / "manifest.json"
    save_model_checkpoint(
        ckpt_path, config.model, model, scaler,
        meta={
            "feature_set": config.feature_set,
            "split_boundary": config.split_boundary,
            "seed": config.seed,
            "embedding_source": config.embedding_source,
            "class_weights": list(class_weights),
            "experiment": config.echo(),
        },
    )
    write_report(
        report_path,
        build_report(
            model=config.model, feature_set=config.feature_set, seed=config.seed,
            config_echo=config.echo(), results=results, train_log=train_log,
            dataset_fingerprint=dataset.fingerprint(),
        ),
    )
    manifest.artifacts = {"checkpoint": str(ckpt_path), "report": str(report_path)}
    manifest.finish()
    with open(manifest_path, "w") as f:
        f.write(dump_json(manifest.to_dict()))
    return {
        "manifest": str(manifest_path),
        "report": str(report_path),
        "checkpoint": str(ckpt_path),
        "results": results,
    }


def cmd_train(args) -> int:
    config = load_config(args.config)
    if args.seed is not None:
        config.seed = args.seed
    if args.out_dir is not None:
        config.out_dir = args.out_dir
    if args.epochs is not None:
        config.epochs = args.epochs
        config.patience = min(config.patience, config.epochs)
    if args.max_nodes is not None:
        config.max_nodes = args.max_nodes
    for name in ("features", "classes", "edges", "data_dir"):
        value = getattr(args, name, None)
        if value is not None:
            setattr(config, name, value)
    config.validate()
    outcome = run_training(config)
    rep = outcome["results"]["test"]
    _say(
        args,
        f"model {config.model} [{config.feature_set}] seed {config.seed} "
        f"(kernels: {kernels.backend_name()})",
        f"test precision {rep.precision:.4f} recall {rep.recall:.4f} "
        f"f1 {rep.f1:.4f} microF1 {rep.micro_avg_f1:.4f} mcc {rep.mcc:.4f}",
        f"artifacts in {Path(outcome['checkpoint']).parent}",
    )
    return 0


def _evaluation(args):
    meta, model, scaler = load_model_checkpoint(args.checkpoint)
    config = _data_config(args)
    config.max_nodes = args.max_nodes
    config.feature_set = meta["feature_set"]
    config.embedding_source = args.embeddings or meta.get("embedding_source")
    dataset, _ = _load_dataset(config)
    masks = temporal_split(dataset, meta["split_boundary"])
    x, _ = _select_and_scale(config, dataset, masks, scaler=scaler)
    kind = meta["kind"]
    graph = build_graph(dataset) if kind in ("gcn", "gat", "gat_resnet") else None
    return meta, model, dataset, masks, x, graph, kind


def cmd_evaluate(args) -> int:
    meta, model, dataset, masks, x, graph, kind = _evaluation(args)
    probs = _predict(kind, model, graph, x)
    mask = masks.train_eligible if args.split == "train" else masks.test_eligible
    rep = evaluate(
        probs, dataset.label, mask,
        model=kind, feature_set=meta["feature_set"], seed=meta.get("seed", 0),
    )
    payload = build_report(
        model=kind, feature_set=meta["feature_set"], seed=meta.get("seed", 0),
        config_echo=meta.get("experiment", {}), results={args.split: rep},
        train_log=None, dataset_fingerprint=dataset.fingerprint(),
    )
    out = args.out or str(Path(args.checkpoint).parent / f"eval_{args.split}_report.json")
    write_report(out, payload)
    _say(
        args,
        f"{kind} [{meta['feature_set']}] on {args.split}: "
        f"precision {rep.precision:.4f} recall {rep.recall:.4f} f1 {rep.f1:.4f} "
        f"microF1 {rep.micro_avg_f1:.4f} mcc {rep.mcc:.4f}",
        f"report: {out}",
    )
    return 0


def cmd_compare(args) -> int:
    payloads = [read_report(p) for p in args.reports]
    out_dir = Path(args.out_dir or ".")
    out_dir.mkdir(parents=True, exist_ok=True)
    table = comparison_table(payloads)
    (out_dir / "comparison.txt").write_text(table)
    (out_dir / "radar.csv").write_text(radar_csv(payloads))
    (out_dir / "mcc_bars.csv").write_text(mcc_bars_csv(payloads))
    if not args.quiet:
        print(table, end="")
    return 0


def cmd_embed(args) -> int:
    meta, model, dataset, masks, x, graph, kind = _evaluation(args)
    if kind != "gat_resnet":
        raise ParameterError(f"embeddings require a gat_resnet checkpoint, got {kind!r}")
    count = export_embeddings(model, graph, dataset, args.out, features=x)
    manifest_path = Path(args.checkpoint).parent / "manifest.json"
    if manifest_path.exists():
        import json

        manifest = json.loads(manifest_path.read_text())
        manifest.setdefault("artifacts", {})["embeddings"] = str(args.out)
        manifest_path.write_text(dump_json(manifest))
    _say(args, f"wrote {count} embedding rows to {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="amlgraph",
        description="Graph machine learning for illicit-transaction detection "
        "on the Elliptic Bitcoin dataset.",
    )
    parser.add_argument("--version", action="version", version=f"amlgraph {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("validate", help="check a dataset and print its fingerprint")
    _add_data_args(sp)
    sp.add_argument("--max-nodes", type=int, help="subsample to the earliest N nodes")
    sp.add_argument("--quiet", action="store_true")
    sp.set_defaults(func=cmd_validate, max_nodes=None)

    sp = sub.add_parser("train", help="run an experiment from a config file")
    sp.add_argument("--config", required=True, help="experiment config file")
    sp.add_argument("--seed", type=int, help="override experiment.seed")
    sp.add_argument("--out-dir", help="override experiment.out_dir")
    sp.add_argument("--epochs", type=int, help="override train.epochs")
    sp.add_argument("--max-nodes", type=int, help="subsample to the earliest N nodes")
    _add_data_args(sp)
    sp.add_argument("--quiet", action="store_true")
    sp.set_defaults(func=cmd_train)

    sp = sub.add_parser("evaluate", help="score a checkpoint on a split")
    sp.add_argument("--checkpoint", required=True)
    sp.add_argument("--split", choices=("train", "test"), default="test")
    sp.add_argument("--out", help="report output path")
    sp.add_argument("--embeddings", help="embedding CSV for +NE feature sets")
    sp.add_argument("--max-nodes", type=int)
    _add_data_args(sp)
    sp.add_argument("--quiet", action="store_true")
    sp.set_defaults(func=cmd_evaluate, max_nodes=None)

    sp = sub.add_parser("compare", help="tabulate reports and emit plot data")
    sp.add_argument("reports", nargs="+", help="metrics report JSON files")
    sp.add_argument("--out-dir", help="where to write comparison.txt and plot CSVs")
    sp.add_argument("--quiet", action="store_true")
    sp.set_defaults(func=cmd_compare)

    sp = sub.add_parser("embed", help="export node embeddings from a GAT-ResNet checkpoint")
    sp.add_argument("--checkpoint", required=True)
    sp.add_argument("--out", required=True, help="embedding CSV output path")
    sp.add_argument("--embeddings", help="embedding CSV for +NE feature sets")
    sp.add_argument("--max-nodes", type=int)
    _add_data_args(sp)
    sp.add_argument("--quiet", action="store_true")
    sp.set_defaults(func=cmd_embed, max_nodes=None)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DataFormatError, DataIntegrityError, CheckpointFormatError) as exc:
        print(f"error: data: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (ShapeError, DomainError, ParameterError, DegenerateDataError, HarnessError) as exc:
        print(f"error: compute: {exc}", file=sys.stderr)
        return EXIT_COMPUTE
    except OSError as exc:
        print(f"error: io: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
