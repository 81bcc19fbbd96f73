"""Batch command line: synth -> encode -> train -> compare.

Exit codes: 0 success, 2 configuration error, 3 data error, 4 training
divergence.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import logging
import os
import re
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .config import SEED_ENV_VAR, load_run_config
from .cnn import build_model, evaluate, save_model, split_7_1_2, train
from .data import load_csv_dataset, load_manifest, load_synth_spec, write_synthetic_csv
from .errors import ConfigError, DataError, DfhcError, DivergenceError
from .pipeline import encode_segment
from .pngio import read_png, write_png

log = logging.getLogger("dfhc")

INDEX_NAME = "index.csv"
RUN_META_NAME = "run.json"
REPORT_NAME = "report.json"

_INDEX_FIELDS = ["path", "label", "source_id", "eligible", "fold_width", "effective_len"]


def _safe_name(source_id: str) -> str:
    return re.sub(r"[^A-Za-z0-9._-]", "_", source_id)


def _dataset_hash(rows: list[dict]) -> str:
    lines = sorted(f"{r['source_id']},{r['label']}" for r in rows)
    return hashlib.sha256("\n".join(lines).encode()).hexdigest()


def cmd_synth(args) -> int:
    spec = load_synth_spec(args.spec)
    if SEED_ENV_VAR in os.environ:
        spec = replace(spec, seed=int(os.environ[SEED_ENV_VAR]))
    manifest_path = write_synthetic_csv(spec, args.out)
    n = spec.num_classes * spec.samples_per_class
    log.info("wrote %d samples (%d classes) under %s", n, spec.num_classes, args.out)
    log.info("manifest: %s", manifest_path)
    return 0


def cmd_encode(args) -> int:
    config = load_run_config(args.config)
    manifest = load_manifest(args.manifest)
    segments = load_csv_dataset(manifest, window_len=config.window_len, overlap=config.overlap)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    method = config.codec.method.value
    rows = []
    failures = 0
    for segment in segments:
        try:
            encoded = encode_segment(segment, config.codec)
        except DfhcError as exc:
            failures += 1
            log.warning("skipping %s: %s", segment.source_id, exc)
            continue
        name = f"{_safe_name(segment.source_id)}_{method}.png"
        write_png(out_dir / name, encoded.raster)
        rows.append(
            {
                "path": name,
                "label": segment.label,
                "source_id": segment.source_id,
                "eligible": 1,
                "fold_width": encoded.plan.width,
                "effective_len": encoded.plan.effective_len,
            }
        )
    if not rows:
        raise DataError(f"all {failures} segments failed to encode")
    with open(out_dir / INDEX_NAME, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=_INDEX_FIELDS)
        writer.writeheader()
        writer.writerows(rows)
    meta = {
        "method": method,
        "target_size": config.codec.target_size,
        "dataset_hash": _dataset_hash(rows),
        "images": len(rows),
        "skipped": failures,
        "fold_widths": sorted({r["fold_width"] for r in rows}),
    }
    (out_dir / RUN_META_NAME).write_text(json.dumps(meta, indent=2) + "\n")
    log.info(
        "encoded %d/%d segments with %s -> %s",
        len(rows), len(segments), method, out_dir / INDEX_NAME,
    )
    return 0


def _load_index(index_path: Path):
    if not index_path.exists():
        raise DataError(f"index file {index_path} does not exist")
    with open(index_path, newline="") as fh:
        rows = [row for row in csv.DictReader(fh) if row.get("eligible", "1") == "1"]
    if not rows:
        raise DataError(f"index {index_path} lists no eligible images")
    base = index_path.parent
    images = []
    labels = []
    for row in rows:
        raster = read_png(base / row["path"])
        images.append(np.moveaxis(raster.data, 2, 0))  # (C, H, W)
        labels.append(row["label"])
    shapes = {im.shape for im in images}
    if len(shapes) != 1:
        raise DataError(f"index images disagree on shape: {sorted(shapes)}")
    return np.stack(images), labels, rows


def cmd_train(args) -> int:
    config = load_run_config(args.config)
    index_path = Path(args.index)
    images, labels, rows = _load_index(index_path)
    class_counts = {}
    for lab in labels:
        class_counts[lab] = class_counts.get(lab, 0) + 1
    if len(class_counts) < 2:
        raise DataError(f"need >= 2 classes to train, got {sorted(class_counts)}")
    thin = {lab: n for lab, n in class_counts.items() if n < 5}
    if thin:
        raise DataError(f"classes too small for a 7:1:2 split: {thin}")
    splits = split_7_1_2(images, labels, seed=config.split_seed)
    if splits.val.size == 0:
        # classes of 5-6 samples floor to an empty 10% slice
        raise DataError(
            "validation split is empty; every class needs at least 7 samples"
        )
    _, channels, height, width = images.shape
    if height != width:
        raise DataError(f"images must be square, got {height}x{width}")
    model = build_model(
        input_size=height,
        in_channels=channels,
        num_classes=len(splits.class_names),
        seed=config.cnn.seed,
        conv_widths=config.cnn.conv_widths,
    )
    report = train(
        model,
        splits,
        epochs=config.cnn.epochs,
        batch_size=config.cnn.batch_size,
        lr=config.cnn.learning_rate,
        momentum=config.cnn.momentum,
        seed=config.cnn.seed,
    )
    metrics = evaluate(model, splits.test)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    meta_path = index_path.parent / RUN_META_NAME
    meta = json.loads(meta_path.read_text()) if meta_path.exists() else {}
    payload = {
        "method": meta.get("method", config.codec.method.value),
        "dataset_hash": meta.get("dataset_hash", _dataset_hash(rows)),
        "fold_widths": meta.get("fold_widths", sorted({int(r["fold_width"]) for r in rows})),
        "classes": list(splits.class_names),
        "image_size": height,
        "channels": channels,
        "counts": {
            "train": splits.train.size,
            "val": splits.val.size,
            "test": splits.test.size,
        },
        "epochs": [
            {"epoch": e.epoch, "train_loss": e.train_loss, "val_accuracy": e.val_accuracy}
            for e in report.epochs
        ],
        "best_val_accuracy": report.best_val_accuracy,
        "best_epoch": report.best_epoch,
        "test_accuracy": metrics.accuracy,
        "confusion_matrix": metrics.confusion_matrix.tolist(),
        "seeds": {"split": config.split_seed, "cnn": config.cnn.seed},
    }
    (out_dir / REPORT_NAME).write_text(json.dumps(payload, indent=2) + "\n")
    with open(out_dir / "confusion_matrix.csv", "w", newline="") as fh:
        csv.writer(fh).writerows(metrics.confusion_matrix.tolist())
    save_model(model, out_dir / "model.npz")
    summary = _summary_text(payload)
    (out_dir / "summary.txt").write_text(summary)
    print(summary, end="")
    return 0


def _summary_text(payload: dict) -> str:
    lines = [
        f"method:         {payload['method']}",
        f"classes:        {', '.join(payload['classes'])}",
        f"images:         {payload['counts']['train']}/{payload['counts']['val']}"
        f"/{payload['counts']['test']} train/val/test "
        f"({payload['image_size']}x{payload['image_size']}x{payload['channels']})",
        f"best val acc:   {payload['best_val_accuracy']:.4f} (epoch {payload['best_epoch']})",
        f"test accuracy:  {payload['test_accuracy']:.4f}",
        "confusion matrix (rows: true, cols: predicted):",
    ]
    for row in payload["confusion_matrix"]:
        lines.append("  " + " ".join(f"{v:6d}" for v in row))
    return "\n".join(lines) + "\n"


def cmd_compare(args) -> int:
    reports = []
    for run_dir in args.runs:
        path = Path(run_dir) / REPORT_NAME
        if not path.exists():
            raise DataError(f"{path} not found; run the train command first")
        payload = json.loads(path.read_text())
        payload["_run"] = str(run_dir)
        reports.append(payload)
    if len(reports) < 2:
        raise ConfigError("compare needs at least two run directories")
    hashes = {r["dataset_hash"] for r in reports}
    if len(hashes) != 1:
        raise DataError(
            "runs were made from different datasets: "
            + ", ".join(f"{r['_run']}={r['dataset_hash'][:12]}" for r in reports)
        )
    reports.sort(key=lambda r: -r["test_accuracy"])
    header = ["method", "test_accuracy", "fold_widths", "run"]
    rows = [
        [
            r["method"],
            f"{r['test_accuracy']:.4f}",
            "/".join(str(w) for w in r["fold_widths"]),
            r["_run"],
        ]
        for r in reports
    ]
    widths = [max(len(h), *(len(row[i]) for row in rows)) for i, h in enumerate(header)]
    text_lines = ["  ".join(h.ljust(widths[i]) for i, h in enumerate(header))]
    for row in rows:
        text_lines.append("  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)))
    text = "\n".join(text_lines) + "\n"
    print(text, end="")
    if args.out:
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        with open(out_dir / "comparison.csv", "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            writer.writerows(rows)
        (out_dir / "comparison.txt").write_text(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dfhc",
        description="Fold multi-channel time series into square images and "
        "classify them with a compact CNN.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic CSV dataset + manifest")
    p.add_argument("--spec", required=True, help="synth spec JSON")
    p.add_argument("--out", required=True, help="output dataset directory")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("encode", help="encode a CSV dataset into PNG images")
    p.add_argument("--manifest", required=True, help="dataset manifest JSON")
    p.add_argument("--config", required=True, help="run config JSON")
    p.add_argument("--out", required=True, help="output directory for PNGs + index")
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("train", help="train and evaluate the classifier on an index")
    p.add_argument("--index", required=True, help="index.csv from the encode step")
    p.add_argument("--config", required=True, help="run config JSON")
    p.add_argument("--out", required=True, help="output directory for reports")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("compare", help="tabulate test accuracy across train runs")
    p.add_argument("--runs", nargs="+", required=True, help="train output directories")
    p.add_argument("--out", help="optional directory for comparison.csv/.txt")
    p.set_defaults(func=cmd_compare)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(message)s",
    )
    try:
        return args.func(args)
    except ConfigError as exc:
        log.error("config error: %s", exc)
        return 2
    except DivergenceError as exc:
        log.error("training diverged: %s", exc)
        return 4
    except DataError as exc:
        log.error("data error: %s", exc)
        return 3


if __name__ == "__main__":
    sys.exit(main())
