"""Command line: train-mnist, train-head, and export.

`train-mnist` trains a reference network and writes its bundle
(network JSON, train/test sample and label CSVs, split manifest),
printing the manifest JSON.  `train-head` fits the feature head on two
CSVs and writes its network JSON.  `export` writes dataset CSVs
without training, for building extra sample sets.  Errors print one
machine-readable JSON line to stderr and exit 1; unknown flags exit 2.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .data import binary_subset, load_dataset
from .train import HeadConfig, TrainConfig, train_head, train_mnist


def _parse_classes(text: str) -> Optional[tuple[int, int]]:
    if text == "all":
        return None
    parts = text.split(",")
    if len(parts) != 2:
        raise ValueError("--classes expects 'all' or two indices 'i,j'")
    return int(parts[0]), int(parts[1])


def _cmd_train_mnist(args) -> int:
    config = TrainConfig(
        data_dir=args.data_dir, classes=_parse_classes(args.classes),
        hidden=args.hidden, epochs=args.epochs, batch=args.batch,
        lr=args.lr, seed=args.seed, train_count=args.train_count,
        test_count=args.test_count, out_dir=args.out_dir)
    bundle = train_mnist(config)
    print(bundle.manifest.read_text())
    return 0


def _cmd_train_head(args) -> int:
    features = np.loadtxt(args.features, delimiter=",", ndmin=2)
    labels = np.loadtxt(args.labels, ndmin=1).astype(np.int64)
    config = HeadConfig(units=args.units, epochs=args.epochs,
                        batch=args.batch, lr=args.lr, seed=args.seed)
    net, metrics = train_head(features, labels, config,
                              classes=args.classes)
    Path(args.out).write_text(json.dumps(net))
    print(json.dumps(metrics))
    return 0


def _cmd_export(args) -> int:
    data = load_dataset(args.data_dir, seed=args.seed,
                        train_count=args.count if args.split == "train"
                        else None,
                        test_count=args.count if args.split == "test"
                        else None)
    x, y = data[f"x_{args.split}"], data[f"y_{args.split}"]
    pair = _parse_classes(args.classes)
    if pair is not None:
        x, y = binary_subset(x, y, pair)
    if args.count is not None:
        x, y = x[:args.count], y[:args.count]
    np.savetxt(args.samples_out, x, delimiter=",")
    np.savetxt(args.labels_out, y, fmt="%d")
    print(json.dumps({"source": data["source"], "split": args.split,
                      "rows": int(len(y)),
                      "classes": "all" if pair is None else list(pair)}))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="trainexport",
        description="train reference networks and export their bundles")
    commands = parser.add_subparsers(dest="command", required=True)

    sub = commands.add_parser("train-mnist",
                              help="train a reference net, export a bundle")
    sub.add_argument("--data-dir", default=None,
                     help="directory with IDX files; default synthetic")
    sub.add_argument("--classes", default="all",
                     help="'all' or a pair 'i,j' for a single-logit net")
    sub.add_argument("--hidden", type=int, default=100)
    sub.add_argument("--epochs", type=int, default=6)
    sub.add_argument("--batch", type=int, default=128)
    sub.add_argument("--lr", type=float, default=1e-3)
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--train-count", type=int, default=None)
    sub.add_argument("--test-count", type=int, default=None)
    sub.add_argument("--out-dir", default=".")
    sub.set_defaults(func=_cmd_train_mnist)

    sub = commands.add_parser("train-head",
                              help="train the feature-head classifier")
    sub.add_argument("--features", required=True)
    sub.add_argument("--labels", required=True)
    sub.add_argument("--units", type=int, default=100)
    sub.add_argument("--classes", type=int, default=None,
                     help="output count; default max label + 1")
    sub.add_argument("--epochs", type=int, default=200)
    sub.add_argument("--batch", type=int, default=128)
    sub.add_argument("--lr", type=float, default=1e-3)
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--out", required=True)
    sub.set_defaults(func=_cmd_train_head)

    sub = commands.add_parser("export",
                              help="write dataset CSVs without training")
    sub.add_argument("--data-dir", default=None)
    sub.add_argument("--split", choices=("train", "test"), default="test")
    sub.add_argument("--classes", default="all")
    sub.add_argument("--count", type=int, default=None)
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--samples-out", required=True)
    sub.add_argument("--labels-out", required=True)
    sub.set_defaults(func=_cmd_export)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, KeyError, TypeError, OSError,
            json.JSONDecodeError) as exc:
        print(json.dumps({"error": {"type": type(exc).__name__,
                                    "message": str(exc)}}),
              file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
