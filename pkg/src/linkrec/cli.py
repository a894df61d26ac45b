"""Command-line pipeline: split, train, extract-teacher, evaluate,
predict, and synth.

Exit codes: 0 success, 1 usage/config error, 2 data error, 3 numerical
failure. Every config key can come from a ``key = value`` file via
``--config`` and is overridable by a flag of the same dotted name.
"""

from __future__ import annotations

import argparse
import contextlib
import sys
import time
from pathlib import Path

from .config import SCHEMA, RunConfig
from .data import (
    FilterStats,
    ItemVocab,
    dataset_from_split_file,
    filter_and_split,
    ingest_sessions,
    load_sessions,
    write_sessions,
)
from .errors import ConfigError, DataError, NumericalError
from .evaluate import evaluate_iterative, evaluate_leave_one_out, head_item_set, head_tail_partition
from .inference import build_inference_vector, predict_topn
from .modelio import read_model, write_model
from .pipeline import KINDS_NEEDING_TEACHER, fit_model
from .synth import generate_markov_log
from .teacher import extract_teacher, markov_teacher, read_teacher, write_teacher


class CliParser(argparse.ArgumentParser):
    """argparse reports usage problems with exit code 2; remap to 1."""

    def error(self, message):
        raise ConfigError(message)


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", metavar="FILE", help="key = value config file")
    group = parser.add_argument_group("config overrides")
    for key, (_, default, help_text) in SCHEMA.items():
        group.add_argument(f"--{key}", dest=key, metavar="V", help=f"{help_text} [{default}]")


def build_parser() -> CliParser:
    parser = CliParser(prog="linkrec", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    p = sub.add_parser("split", parents=[], help="filter a log and write chronological splits")
    p.add_argument("input", help="interaction log")
    p.add_argument("--out-dir", required=True, help="directory for split files + vocab")
    _add_config_flags(p)

    p = sub.add_parser("train", help="train a model on a split file")
    p.add_argument("train_file", help="train split file")
    p.add_argument("--vocab", required=True, help="vocabulary file")
    p.add_argument("--out", required=True, help="model output path")
    p.add_argument("--teacher", help="teacher matrix file (required for NIT/LINK)")
    p.add_argument(
        "--markov-teacher",
        action="store_true",
        help="build the teacher from train-split transition counts",
    )
    _add_config_flags(p)

    p = sub.add_parser("extract-teacher", help="write a Markov teacher matrix file")
    p.add_argument("train_file", help="train split file")
    p.add_argument("--vocab", required=True)
    p.add_argument("--out", required=True, help="teacher output path")
    _add_config_flags(p)

    p = sub.add_parser("evaluate", help="score a model on a test split")
    p.add_argument("model_file")
    p.add_argument("test_file")
    p.add_argument("--vocab", required=True)
    p.add_argument("--report", required=True, metavar="PREFIX", help="writes PREFIX.txt and PREFIX.json")
    _add_config_flags(p)

    p = sub.add_parser("predict", help="rank items for a session prefix")
    p.add_argument("model_file")
    p.add_argument("--vocab", required=True)
    p.add_argument("--items", required=True, help="comma-separated session prefix tokens")
    _add_config_flags(p)

    p = sub.add_parser("synth", help="generate a seeded synthetic interaction log")
    p.add_argument("output", help="log output path")
    _add_config_flags(p)

    return parser


def _merge_config(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig()
    if getattr(args, "config", None):
        cfg.load_file(args.config)
    for key in SCHEMA:
        text = getattr(args, key, None)
        if text is not None:
            cfg.set_text(key, text)
    cfg.validate()
    return cfg


def cmd_split(args, cfg: RunConfig) -> int:
    fmt = cfg.log_format()
    result = ingest_sessions(args.input, fmt)
    stats = FilterStats()
    train, valid, test = filter_and_split(
        result.interactions,
        min_item_freq=cfg["data.min_item_freq"],
        min_session_len=cfg["data.min_session_len"],
        ratios=cfg["data.ratios"],
        stats=stats,
    )
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_sessions(train, out_dir / "train.csv", fmt)
    write_sessions(valid, out_dir / "valid.csv", fmt)
    write_sessions(test, out_dir / "test.csv", fmt)
    train.vocab.save(out_dir / "vocab.txt")
    print(f"interactions {stats.raw_interactions} (malformed {result.malformed})")
    print(f"sessions {stats.raw_sessions}")
    print(f"items removed by frequency filter {stats.removed_items}")
    print(f"sessions dropped as too short {stats.dropped_short_sessions}")
    print(f"eval sessions dropped after vocab restriction {stats.eval_sessions_dropped}")
    print(f"split sizes train={len(train)} valid={len(valid)} test={len(test)}")
    print(f"vocabulary size {len(train.vocab)}")
    return 0


def _load_teacher(args, cfg: RunConfig, train, vocab):
    if getattr(args, "teacher", None):
        return read_teacher(args.teacher, vocab)
    if getattr(args, "markov_teacher", False):
        scorer = markov_teacher(train, cfg["teacher.smoothing"])
        return extract_teacher(scorer, len(vocab), cfg["solver.tau"], vocab)
    return None


def cmd_train(args, cfg: RunConfig) -> int:
    kind = cfg["model.kind"]
    vocab = ItemVocab.load(args.vocab)
    train = dataset_from_split_file(args.train_file, vocab, cfg.log_format(), "train")
    teacher = _load_teacher(args, cfg, train, vocab)
    if kind in KINDS_NEEDING_TEACHER and teacher is None:
        raise ConfigError(f"model.kind={kind} needs --teacher FILE or --markov-teacher")
    start = time.perf_counter()
    model, pair_count = fit_model(train, kind, cfg.solver_config(), cfg["decay.pos"], teacher)
    wall = time.perf_counter() - start
    write_model(model, args.out, cfg["decay.pos"])
    print(f"trained kind={kind} n={model.n} pairs={pair_count} wall={wall:.3f}s -> {args.out}")
    return 0


def cmd_extract_teacher(args, cfg: RunConfig) -> int:
    vocab = ItemVocab.load(args.vocab)
    train = dataset_from_split_file(args.train_file, vocab, cfg.log_format(), "train")
    scorer = markov_teacher(train, cfg["teacher.smoothing"])
    teacher = extract_teacher(scorer, len(vocab), cfg["solver.tau"], vocab)
    write_teacher(teacher, args.out)
    print(f"teacher n={teacher.n} tau={teacher.tau} -> {args.out}")
    return 0


def cmd_evaluate(args, cfg: RunConfig) -> int:
    model, _ = read_model(args.model_file)
    vocab = ItemVocab.load(args.vocab)
    if model.n != len(vocab):
        raise DataError(f"model n={model.n} does not match vocabulary size {len(vocab)}")
    model.vocab = vocab
    sessions, _ = load_sessions(args.test_file, vocab, cfg.log_format(), keep_unmapped=True)
    head_items = None
    if cfg["eval.train_file"]:
        train = dataset_from_split_file(cfg["eval.train_file"], vocab, cfg.log_format(), "train")
        head_items = head_item_set(head_tail_partition(train))
    evaluator = evaluate_iterative if cfg["eval.protocol"] == "iterative" else evaluate_leave_one_out
    report = evaluator(
        model,
        sessions,
        cfg["eval.ks"],
        cfg["decay.inf"],
        head_items=head_items,
        exclude_seen=cfg["eval.exclude_seen"],
    )
    report.save(args.report + ".txt", args.report + ".json")
    sys.stdout.write(report.to_text())
    return 0


def cmd_predict(args, cfg: RunConfig) -> int:
    model, _ = read_model(args.model_file)
    vocab = ItemVocab.load(args.vocab)
    if model.n != len(vocab):
        raise DataError(f"model n={model.n} does not match vocabulary size {len(vocab)}")
    tokens = [t for t in args.items.split(",") if t != ""]
    mapped = []
    for tok in tokens:
        idx = vocab.get(tok)
        if idx is None:
            print(f"warning: unknown item {tok!r} skipped", file=sys.stderr)
        mapped.append(idx)
    N = cfg["eval.topn"]
    if N == 0:
        return 0
    x = build_inference_vector(mapped, cfg["decay.inf"])
    ranked = predict_topn(x, model, N, exclude_seen=cfg["eval.exclude_seen"])
    for idx, score in zip(ranked.items, ranked.scores):
        print(f"{vocab.token(int(idx))}\t{float(score)!r}")
    return 0


def cmd_synth(args, cfg: RunConfig) -> int:
    generate_markov_log(
        args.output,
        n_items=cfg["synth.items"],
        n_sessions=cfg["synth.sessions"],
        seed=cfg["synth.seed"],
        min_len=cfg["synth.min_len"],
        max_len=cfg["synth.max_len"],
        branching=cfg["synth.branching"],
        noise=cfg["synth.noise"],
        fmt=cfg.log_format(),
    )
    print(f"synthetic log: items={cfg['synth.items']} sessions={cfg['synth.sessions']} "
          f"seed={cfg['synth.seed']} -> {args.output}")
    return 0


_COMMANDS = {
    "split": cmd_split,
    "train": cmd_train,
    "extract-teacher": cmd_extract_teacher,
    "evaluate": cmd_evaluate,
    "predict": cmd_predict,
    "synth": cmd_synth,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            parser.print_usage(sys.stderr)
            raise ConfigError("a command is required")
        cfg = _merge_config(args)
        if cfg["threads"] > 0:
            from threadpoolctl import threadpool_limits

            limiter = threadpool_limits(limits=cfg["threads"])
        else:
            limiter = contextlib.nullcontext()
        with limiter:
            return _COMMANDS[args.command](args, cfg)
    except ConfigError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except (DataError, OSError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
