"""Command-line interface.

Exit codes: 0 success, 2 usage or input validation failure, 1 unexpected
runtime failure. No command mutates its input files; outputs are written
atomically. All randomness flows from --seed (default 42).
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys

import numpy as np

from . import applications, io
from .errors import InvalidConfigError, SemscaleError
from .geometry import LabeledFeatureSet, VolumeParams, feature_volume
from .imbalance import imbalance_report
from .reweight import dsb_weights
from .trainer import benchmark_config, evaluate, gaussian_benchmark, train

DEFAULT_SEED = 42


def _emit(text: str, output: str | None) -> None:
    if output:
        io.atomic_write_text(output, text)
    else:
        sys.stdout.write(text)


def _default_alpha(dataset_kind: str) -> float:
    return 2.0 if dataset_kind == "long-tailed" else 1.0


def _cmd_scale(args) -> int:
    dataset = io.read_feature_file(args.features)
    alpha = args.alpha if args.alpha is not None else _default_alpha(args.dataset_kind)
    report = imbalance_report(
        dataset, params=VolumeParams(epsilon=args.epsilon),
        alpha=alpha, dataset_kind=args.dataset_kind,
    )
    _emit(io.report_text(report, io.file_checksum(args.features)), args.output)
    return 0


def _cmd_train_demo(args) -> int:
    if args.config:
        config, dataset_path = io.load_config(args.config)
    else:
        config, dataset_path = benchmark_config(), None
    if args.seed is not None:
        config = dataclasses.replace(config, seed=args.seed)
    if config.epochs < config.warm_epochs + 1:
        raise InvalidConfigError(
            f"epochs ({config.epochs}) must be >= warm_epochs + 1 "
            f"({config.warm_epochs + 1}) for the re-weighting stage to run"
        )
    if dataset_path:
        dataset = io.read_feature_file(dataset_path)
        checksum = io.file_checksum(dataset_path)
        test_set = None
    else:
        dataset, test_set = gaussian_benchmark(seed=config.seed)
        checksum = io.text_checksum(io.config_text(config))
    result = train(dataset, config)
    if args.trace:
        io.atomic_write_text(args.trace, io.trace_csv_text(result.trace))
    if args.report:
        io.atomic_write_text(args.report, io.report_text(result.report, checksum))
    if args.pool_dump:
        io.atomic_write_text(args.pool_dump, io.pool_csv_text(result.pool))
    metrics = evaluate(result.model, test_set if test_set is not None else dataset)
    summary = {
        "accuracy": metrics.accuracy,
        "perClassRecall": [float(r) for r in metrics.per_class_recall],
        "classIds": [int(c) for c in metrics.class_ids],
        "finalWeights": [float(w) for w in result.trace[-1].per_class_weights],
    }
    sys.stdout.write(json.dumps(summary, indent=2) + "\n")
    return 0


def _cmd_curve(args) -> int:
    dataset = io.read_feature_file(args.features)
    sizes = [int(s) for s in args.sizes.split(",") if s]
    curve = applications.marginal_curve(
        dataset, sizes, nested=args.nested,
        params=VolumeParams(epsilon=args.epsilon), seed=args.seed,
    )
    _emit(io.curve_csv_text(curve), args.output)
    return 0


def _cmd_select(args) -> int:
    dataset = io.read_feature_file(args.features)
    if args.class_id is not None:
        member_cols = np.flatnonzero(dataset.labels == args.class_id)
        if member_cols.size == 0:
            raise SemscaleError(f"class {args.class_id} not present in {args.features}")
        matrix = dataset.values[:, member_cols]
    else:
        member_cols = np.arange(dataset.count)
        matrix = dataset.values
    local = applications.pizza_select(
        matrix, budget=args.budget, trials=args.trials,
        params=VolumeParams(epsilon=args.epsilon), seed=args.seed,
    )
    chosen = member_cols[local]
    payload = {
        "selectedIndices": [int(i) for i in chosen],
        "scale": feature_volume(matrix[:, local], VolumeParams(epsilon=args.epsilon)),
    }
    _emit(json.dumps(payload, indent=2) + "\n", args.output)
    return 0


def _cmd_collect(args) -> int:
    history = io.read_history_file(args.history)
    decision = applications.collection_stop(history, args.threshold_pct)
    payload = {"stopped": decision.stopped, "index": decision.index}
    _emit(json.dumps(payload) + "\n", args.output)
    return 0


def _cmd_hierarchy(args) -> int:
    children = io.read_feature_file(args.children)
    parents = io.read_feature_file(args.parents)
    child_map = {int(c): children.class_matrix(c) for c in children.classes}
    parent_map = {int(p): parents.class_matrix(p) for p in parents.classes}
    result = applications.hierarchy_match(
        child_map, parent_map, params=VolumeParams(epsilon=args.epsilon)
    )
    payload = {
        "matches": [
            {
                "childId": m.child_id,
                "assignedParent": m.assigned_parent,
                "ambiguous": m.ambiguous,
                "ratios": {str(pid): r for pid, r in sorted(m.ratios.items())},
            }
            for m in result.matches
        ]
    }
    _emit(json.dumps(payload, indent=2) + "\n", args.output)
    return 0


def _cmd_weights(args) -> int:
    scales = [float(s) for s in args.scales.split(",") if s]
    weights = dsb_weights(scales)
    _emit(json.dumps([float(w) for w in weights.per_class]) + "\n", args.output)
    return 0


def _cmd_convert(args) -> int:
    rows = []
    with open(args.input, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rows.append([float(v) for v in line.split()])
            except ValueError as exc:
                raise SemscaleError(f"{args.input}:{lineno}: bad value ({exc})")
    if not rows:
        raise SemscaleError(f"{args.input}: no data rows")
    widths = {len(r) for r in rows}
    if len(widths) != 1:
        raise SemscaleError(f"{args.input}: ragged rows (widths {sorted(widths)})")
    matrix = np.array(rows)
    if args.label_column:
        labels = matrix[:, 0].astype(np.int64)
        matrix = matrix[:, 1:]
    elif args.labels:
        labels = np.array([int(t) for t in io.read_history_file(args.labels)], dtype=np.int64)
        if labels.shape[0] != matrix.shape[0]:
            raise SemscaleError(
                f"{args.labels}: {labels.shape[0]} labels for {matrix.shape[0]} samples"
            )
    else:
        labels = np.full(matrix.shape[0], args.label, dtype=np.int64)
    dataset = LabeledFeatureSet(matrix.T, labels)
    io.atomic_write_text(args.output, io.feature_file_text(dataset))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="semscale",
        description="Per-class semantic scale, imbalance reports and re-weighting demos.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("scale", help="per-class scale report for a feature CSV")
    p.add_argument("--features", required=True, help="input feature CSV (label,f0,...)")
    p.add_argument("--epsilon", type=float, default=1.0, help="sphere-packing radius (default 1.0)")
    p.add_argument("--alpha", type=float, default=None,
                   help="interference smoothing >= 1 (default: 2 long-tailed, 1 balanced)")
    p.add_argument("--dataset-kind", choices=("balanced", "long-tailed"), default="balanced")
    p.add_argument("--output", help="report JSON path (default: stdout)")
    p.set_defaults(func=_cmd_scale)

    p = sub.add_parser("train-demo", help="run the three-stage re-weighting demo")
    p.add_argument("--config", help="JSON config file (default: built-in benchmark config)")
    p.add_argument("--trace", help="write per-iteration trace CSV here")
    p.add_argument("--report", help="write final scale report JSON here")
    p.add_argument("--pool-dump", help="write final pool contents CSV here")
    p.add_argument("--seed", type=int, default=None, help="override the config seed")
    p.set_defaults(func=_cmd_train_demo)

    p = sub.add_parser("curve", help="scale vs sample count curves")
    p.add_argument("--features", required=True)
    p.add_argument("--sizes", required=True, help="comma-separated increasing sizes, e.g. 8,16,32")
    p.add_argument("--nested", action=argparse.BooleanOptionalAction, default=True,
                   help="grow one subset per class instead of independent draws")
    p.add_argument("--epsilon", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--output", help="CSV path (default: stdout)")
    p.set_defaults(func=_cmd_curve)

    p = sub.add_parser("select", help="pick the max-scale subset among random candidates")
    p.add_argument("--features", required=True)
    p.add_argument("--class-id", type=int, default=None,
                   help="restrict to one class (default: whole file)")
    p.add_argument("--budget", type=int, required=True, help="subset size")
    p.add_argument("--trials", type=int, default=20, help="number of candidate subsets")
    p.add_argument("--epsilon", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--output", help="JSON path (default: stdout)")
    p.set_defaults(func=_cmd_select)

    p = sub.add_parser("collect", help="decide when a scale history has saturated")
    p.add_argument("--history", required=True, help="file of scale values (newline/comma separated)")
    p.add_argument("--threshold-pct", type=float, required=True,
                   help="stop when the relative increment drops below this percent")
    p.add_argument("--output", help="JSON path (default: stdout)")
    p.set_defaults(func=_cmd_collect)

    p = sub.add_parser("hierarchy", help="match child classes to parent classes by scale change")
    p.add_argument("--children", required=True, help="feature CSV of child classes")
    p.add_argument("--parents", required=True, help="feature CSV of parent classes")
    p.add_argument("--epsilon", type=float, default=1.0)
    p.add_argument("--output", help="JSON path (default: stdout)")
    p.set_defaults(func=_cmd_hierarchy)

    p = sub.add_parser("weights", help="normalized inverse-scale weights")
    p.add_argument("--scales", required=True, help="comma-separated positive scales, e.g. 1,3")
    p.add_argument("--output", help="JSON path (default: stdout)")
    p.set_defaults(func=_cmd_weights)

    p = sub.add_parser("convert", help="whitespace-separated matrix -> feature CSV")
    p.add_argument("--input", required=True, help="text matrix, one sample per line")
    p.add_argument("--output", required=True, help="feature CSV path")
    p.add_argument("--labels", help="file of per-sample integer labels")
    p.add_argument("--label-column", action="store_true",
                   help="first column of the matrix holds the labels")
    p.add_argument("--label", type=int, default=0, help="constant label when none supplied")
    p.set_defaults(func=_cmd_convert)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SemscaleError as exc:
        print(f"semscale: error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"semscale: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
