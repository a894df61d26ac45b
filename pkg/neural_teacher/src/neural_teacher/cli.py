"""train-export: fit the toy model on a train split and write the TCH1
teacher file. Flag names mirror the toolkit's dotted config keys."""

from __future__ import annotations

import argparse
import sys

from .export import export_teacher
from .train import TrainSettings, train_toy_teacher


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="neural-teacher")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    p = sub.add_parser("train-export", help="train the toy model and export a teacher file")
    p.add_argument("train_file", help="train split file")
    p.add_argument("--vocab", required=True, help="vocabulary file")
    p.add_argument("--out", required=True, help="TCH1 output path")
    p.add_argument("--solver.tau", dest="tau", type=float, default=1.0,
                   help="teacher softmax temperature [1.0]")
    p.add_argument("--data.delimiter", dest="delimiter", default=",",
                   help="session file delimiter [,]")
    p.add_argument("--data.has_header", dest="has_header", action="store_true",
                   help="session file has a header line")
    p.add_argument("--train.epochs", dest="epochs", type=int, default=3,
                   help="training epochs [3]")
    p.add_argument("--train.dim", dest="dim", type=int, default=32,
                   help="embedding width, at most 64 [32]")
    p.add_argument("--train.seed", dest="seed", type=int, default=0,
                   help="seed for deterministic training [0]")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command != "train-export":
        parser.print_usage(sys.stderr)
        return 1
    try:
        settings = TrainSettings(epochs=args.epochs, dim=args.dim, seed=args.seed)
        model = train_toy_teacher(
            args.train_file, args.vocab, settings, args.delimiter, args.has_header
        )
        export_teacher(model, args.tau, args.out)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"teacher n={model.n_items} tau={args.tau} -> {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
