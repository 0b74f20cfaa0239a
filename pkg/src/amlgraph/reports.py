"""Run reports, comparison tables, and plot-data emission.

A metrics report is one JSON document per run: config echo, per-epoch
training log, confusion matrix, and the five metrics for both splits.
Reports carry no timestamps, so identical runs produce identical bytes
(timestamps live in the run manifest instead).

cmd_compare consumes any number of reports and emits an aligned text
table (rows sorted by test MCC, descending), a radar/spider CSV with one
series per model, and an MCC bar-chart CSV.
"""

from __future__ import annotations

import json

from .errors import DataFormatError
from .metrics import MetricsReport

REPORT_FORMAT_VERSION = 1
REPORT_KIND = "metrics_report"

_METRIC_COLUMNS = ("precision", "recall", "f1", "micro_avg_f1", "mcc")
_HEADERS = ("Precision", "Recall", "F1", "MicroF1", "MCC")


def dump_json(payload: dict) -> str:
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def write_report(path, payload: dict) -> None:
    with open(path, "w") as f:
        f.write(dump_json(payload))


def read_report(path) -> dict:
    try:
        with open(path) as f:
            payload = json.load(f)
    except json.JSONDecodeError as exc:
        raise DataFormatError(f"{path}: not a JSON report ({exc})") from exc
    if payload.get("kind") != REPORT_KIND:
        raise DataFormatError(f"{path}: not a metrics report")
    if payload.get("format_version") != REPORT_FORMAT_VERSION:
        raise DataFormatError(
            f"{path}: report format version {payload.get('format_version')} unsupported"
        )
    for key in ("model", "feature_set", "results"):
        if key not in payload:
            raise DataFormatError(f"{path}: report is missing {key!r}")
    if "test" not in payload["results"]:
        raise DataFormatError(f"{path}: report has no test-split results")
    return payload


def build_report(
    model: str,
    feature_set: str,
    seed: int,
    config_echo: dict,
    results: dict,
    train_log: dict | None,
    dataset_fingerprint: dict,
) -> dict:
    return {
        "format_version": REPORT_FORMAT_VERSION,
        "kind": REPORT_KIND,
        "model": model,
        "feature_set": feature_set,
        "seed": seed,
        "config": config_echo,
        "dataset_fingerprint": dataset_fingerprint,
        "results": {split: rep.to_dict() for split, rep in results.items()},
        "train_log": train_log,
    }


def _rows_from_reports(payloads: list) -> list:
    rows = []
    for p in payloads:
        metrics = p["results"]["test"]["metrics"]
        rows.append(
            {
                "model": p["model"],
                "feature_set": p["feature_set"],
                **{k: float(metrics[k]) for k in _METRIC_COLUMNS},
            }
        )
    rows.sort(key=lambda r: -r["mcc"])
    return rows


def comparison_table(payloads: list) -> str:
    """Aligned text table of test metrics, best MCC first."""
    rows = _rows_from_reports(payloads)
    names = [f"{r['model']} [{r['feature_set']}]" for r in rows]
    width = max(len("Model"), *(len(n) for n in names)) + 2
    header = "Model".ljust(width) + "".join(h.rjust(10) for h in _HEADERS)
    lines = [f"amlgraph comparison (format {REPORT_FORMAT_VERSION})", "", header, "-" * len(header)]
    for name, row in zip(names, rows):
        lines.append(name.ljust(width) + "".join(f"{row[k]:10.4f}" for k in _METRIC_COLUMNS))
    return "\n".join(lines) + "\n"


def radar_csv(payloads: list) -> str:
    """One series per model across the five metric axes (spider plot data)."""
    rows = _rows_from_reports(payloads)
    lines = [
        f"# amlgraph radar plot data, format {REPORT_FORMAT_VERSION}",
        "model,feature_set," + ",".join(_METRIC_COLUMNS),
    ]
    for r in rows:
        lines.append(
            f"{r['model']},{r['feature_set']},"
            + ",".join(f"{r[k]:.6f}" for k in _METRIC_COLUMNS)
        )
    return "\n".join(lines) + "\n"


def mcc_bars_csv(payloads: list) -> str:
    rows = _rows_from_reports(payloads)
    lines = [
        f"# amlgraph MCC bar-chart data, format {REPORT_FORMAT_VERSION}",
        "model,feature_set,mcc",
    ]
    for r in rows:
        lines.append(f"{r['model']},{r['feature_set']},{r['mcc']:.6f}")
    return "\n".join(lines) + "\n"


def report_metrics(payload: dict, split: str = "test") -> MetricsReport:
    return MetricsReport.from_dict(
        {**payload["results"][split], "model": payload["model"],
         "feature_set": payload["feature_set"], "seed": payload.get("seed", 0)}
    )
