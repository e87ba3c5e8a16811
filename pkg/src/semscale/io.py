"""File formats: feature CSV, JSON scale reports, trace CSV, config files.

All floats are serialized with ``repr`` (shortest round-trip form), so a
written report parses back to bit-identical values. Writes go through a
temp file + rename so a crash never leaves a half-written output.
"""

from __future__ import annotations

import csv
import hashlib
import json
import os
import tempfile
from dataclasses import asdict

import numpy as np

from .errors import InvalidConfigError, InvalidInputError
from .geometry import LabeledFeatureSet
from .imbalance import SemanticScaleReport
from .trainer import TraceEvent, TrainConfig

CONFIG_KEYS = (
    "warm_epochs", "epochs", "batch_size", "learning_rate", "loss_kind",
    "alpha", "epsilon", "seed", "dataset_kind", "hidden_size", "scale_every",
    "focal_gamma", "nsm_sigma", "dataset",
)


def atomic_write_text(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", text=True)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def file_checksum(path: str) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            digest.update(chunk)
    return "sha256:" + digest.hexdigest()


def text_checksum(text: str) -> str:
    return "sha256:" + hashlib.sha256(text.encode("utf-8")).hexdigest()


def read_feature_file(path: str) -> LabeledFeatureSet:
    """Parse a ``label,f0,...,f{d-1}`` CSV into a labeled feature set."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise InvalidInputError(f"{path}:1: file is empty")
        d = len(header) - 1
        expected = ["label"] + [f"f{i}" for i in range(d)]
        if d < 1 or header != expected:
            raise InvalidInputError(
                f"{path}:1: header must be 'label,f0,...,f{{d-1}}', got {','.join(header)!r}"
            )
        labels = []
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != d + 1:
                raise InvalidInputError(
                    f"{path}:{lineno}: expected {d + 1} columns, got {len(row)}"
                )
            try:
                label = int(row[0])
            except ValueError:
                raise InvalidInputError(f"{path}:{lineno}: label {row[0]!r} is not an integer")
            if label < 0:
                raise InvalidInputError(f"{path}:{lineno}: label must be non-negative")
            try:
                values = [float(v) for v in row[1:]]
            except ValueError as exc:
                raise InvalidInputError(f"{path}:{lineno}: bad feature value ({exc})")
            labels.append(label)
            rows.append(values)
    if not rows:
        raise InvalidInputError(f"{path}: no data rows")
    return LabeledFeatureSet(np.array(rows, dtype=np.float64).T, np.array(labels))


def feature_file_text(dataset: LabeledFeatureSet) -> str:
    lines = ["label," + ",".join(f"f{i}" for i in range(dataset.dim))]
    for j in range(dataset.count):
        vals = ",".join(repr(float(v)) for v in dataset.values[:, j])
        lines.append(f"{int(dataset.labels[j])},{vals}")
    return "\n".join(lines) + "\n"


def report_to_dict(report: SemanticScaleReport, checksum: str) -> dict:
    return {
        "params": {
            "epsilon": report.epsilon,
            "alpha": report.alpha,
            "datasetKind": report.dataset_kind,
        },
        "classes": [
            {
                "id": c.class_id,
                "count": c.count,
                "rawScale": c.raw_scale,
                "interferenceWeight": c.interference_weight,
                "smoothedWeight": c.smoothed_weight,
                "combinedScale": c.combined_scale,
                "lossWeight": c.loss_weight,
                "degenerate": c.degenerate,
            }
            for c in sorted(report.classes, key=lambda c: c.class_id)
        ],
        "checksum": checksum,
    }


def report_text(report: SemanticScaleReport, checksum: str) -> str:
    return json.dumps(report_to_dict(report, checksum), indent=2) + "\n"


def trace_csv_text(trace: list[TraceEvent]) -> str:
    if not trace:
        raise InvalidInputError("trace is empty")
    c = trace[0].per_class_weights.shape[0]
    header = "epoch,iteration,stage,loss," + ",".join(f"w_{i}" for i in range(c)) + ",pool_size"
    lines = [header]
    for ev in trace:
        ws = ",".join(repr(float(w)) for w in ev.per_class_weights)
        lines.append(f"{ev.epoch},{ev.iteration},{ev.stage},{ev.batch_loss!r},{ws},{ev.pool_size}")
    return "\n".join(lines) + "\n"


def pool_csv_text(pool) -> str:
    features, labels = pool.snapshot()
    lines = ["label," + ",".join(f"f{i}" for i in range(features.shape[0]))]
    for j in range(features.shape[1]):
        vals = ",".join(repr(float(v)) for v in features[:, j])
        lines.append(f"{int(labels[j])},{vals}")
    return "\n".join(lines) + "\n"


def curve_csv_text(curve) -> str:
    """Rows of (size, class_id, scale); the across-class sum uses id -1."""
    lines = ["size,class_id,scale"]
    for cid in sorted(curve.per_class):
        for pt in curve.per_class[cid]:
            lines.append(f"{pt.sample_count},{cid},{pt.scale_sum!r}")
    for pt in curve.total:
        lines.append(f"{pt.sample_count},-1,{pt.scale_sum!r}")
    return "\n".join(lines) + "\n"


def load_config(path: str) -> tuple[TrainConfig, str | None]:
    """Read a JSON training config; returns (config, dataset path or None).

    Unknown keys are rejected by name so typos fail loudly.
    """
    with open(path, encoding="utf-8") as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InvalidConfigError(f"{path}: not valid JSON ({exc})")
    if not isinstance(raw, dict):
        raise InvalidConfigError(f"{path}: config must be a JSON object")
    for key in raw:
        if key not in CONFIG_KEYS:
            raise InvalidConfigError(f"{path}: unknown config key {key!r}")
    dataset = raw.pop("dataset", None)
    if dataset is not None and dataset != "builtin" and not isinstance(dataset, str):
        raise InvalidConfigError(f"{path}: 'dataset' must be a path or 'builtin'")
    if dataset == "builtin":
        dataset = None
    try:
        config = TrainConfig(**raw)
    except TypeError as exc:
        raise InvalidConfigError(f"{path}: {exc}")
    return config, dataset


def config_text(config: TrainConfig, dataset: str | None = None) -> str:
    body = asdict(config)
    body["dataset"] = dataset if dataset is not None else "builtin"
    return json.dumps(body, indent=2) + "\n"


def read_history_file(path: str) -> list[float]:
    """Scale history: numbers separated by newlines and/or commas."""
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    tokens = [t for t in text.replace(",", " ").split() if t]
    if not tokens:
        raise InvalidInputError(f"{path}: no values found")
    try:
        return [float(t) for t in tokens]
    except ValueError as exc:
        raise InvalidInputError(f"{path}: bad value ({exc})")
