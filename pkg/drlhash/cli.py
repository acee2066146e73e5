"""Command-line interface.

Subcommands cover the whole pipeline: build a class codebook, synthesize a
dataset, train a Q-network, encode items with it, evaluate retrieval and
sweep the termination threshold or the step cap. Long steps run in a worker
thread under a status spinner; each command ends with a framed summary.
"""

from __future__ import annotations

from argparse import ArgumentParser, Namespace, RawDescriptionHelpFormatter
from asyncio import run
import sys
from typing import List, Optional, Sequence

import numpy as np

from .bch import Codebook, build_codebook
from .constants import (
    CODEBOOK_HEADER_PREFIX,
    DEFAULT_TOP_K,
    EXIT_FAILURE,
    EXIT_INFEASIBLE,
    EXIT_OK,
    FEATURE_MAGIC,
    HISTORY_DEPTH,
    MODEL_MAGIC,
    SPLITS,
)
from .dataset import Dataset, encode_dataset, load_features, random_codes, synth_gaussian
from .errors import DrlhashError, InfeasibleParameters
from .evaluation import mean_average_precision
from .hamming import d_pos
from .io import (
    load_train_config,
    read_codebook,
    read_codes,
    read_features,
    read_labels,
    write_codebook,
    write_codes,
    write_features,
    write_labels,
    write_output,
)
from .models import EnvConfig
from .qnetwork import load_network
from .reporting import (
    generate_codebook_report,
    generate_retrieval_report,
    generate_sweep_report,
    generate_training_report,
)
from .status import StatusSpinner
from .sweep import SWEEP_PARAMS, sweep_eta, sweep_max_steps, sweep_rows, sweep_table
from .trainer import run_training

_FORMATS = f"""file formats:
  codebook   text; header '{CODEBOOK_HEADER_PREFIX} b=.. C=.. n=.. D=.. R=.. seed=..',
             then one codeword per class as a string of 0/1 characters
  features   binary little-endian; magic {FEATURE_MAGIC.decode()}, uint32 n, uint32 d_f,
             then n*d_f float32 values row-major
  labels     text; one line per item, comma-separated class indices
  codes      text; one 0/1 string per item, bit 0 first
  model      binary; magic {MODEL_MAGIC.decode()}, one architecture line, float64 parameters
  config     text; 'key = value' lines, '#' comments; keys: epochs eps_start eps_end
             eps_decay_epochs gamma batch_size buffer_capacity learning_rate
             target_sync_interval expert_prob seed hidden dropout eta sigma max_steps

exit codes: 0 success, 1 I/O or format error, 2 infeasible parameters"""


def _unlabelled(features_path: str) -> Dataset:
    features = read_features(features_path)
    n = features.shape[0]
    return Dataset(features, ((),) * n, ("database",) * n, f"features={features_path}")


def _check_model_fits(dataset: Dataset, book: Codebook, model_path: str):
    return load_network(
        model_path,
        input_dim=dataset.feature_dim + (HISTORY_DEPTH + 1) * book.b,
        num_actions=book.b + 1,
    )


def _split_paths(prefix: str, split: str):
    return f"{prefix}.{split}.fv", f"{prefix}.{split}.labels"


def _cmd_codebook(args: Namespace) -> int:
    book = build_codebook(args.classes, args.bits, args.seed)
    write_codebook(book, args.out)
    generate_codebook_report(book, args.out)
    return EXIT_OK


def _cmd_synth(args: Namespace) -> int:
    data = synth_gaussian(args.classes, args.per_class, args.dim, args.spread, args.seed)
    written = []
    for split in SPLITS:
        if split == "database":
            part = data.retrieval_database(include_train=not args.exclude_train)
        else:
            part = data.subset(split)
        fv_path, labels_path = _split_paths(args.out_prefix, split)
        write_features(part.features, fv_path)
        write_labels(part.labels, labels_path)
        written.append(f"{split}: {len(part)} items -> {fv_path}, {labels_path}")
    print(f"✅ Synthesized {len(data)} items ({data.provenance})")
    for line in written:
        print(f"   {line}")
    return EXIT_OK


async def _cmd_train(args: Namespace) -> int:
    dataset = load_features(args.features, args.labels)
    book = read_codebook(args.codebook)
    config = load_train_config(args.config)

    spinner = StatusSpinner(unit="epochs")
    result = await spinner.run(
        f"Training on {len(dataset)} items...",
        run_training,
        dataset,
        book,
        config,
        args.out_model,
        args.log,
        spinner.update_progress,
        args.threads != 1,
    )
    spinner.update_status(
        f"✅ Training: {len(result.epochs)} epochs, {result.updates} updates"
    )
    generate_training_report(result.epochs, result.env_config, [args.out_model, args.log])
    return EXIT_OK


async def _cmd_encode(args: Namespace) -> int:
    book = read_codebook(args.codebook)
    dataset = (
        load_features(args.features, args.labels, split="database")
        if args.labels
        else _unlabelled(args.features)
    )
    if args.labels:
        dataset.check_classes(book.num_classes)
    net = _check_model_fits(dataset, book, args.model)
    env_config = EnvConfig.for_codebook(
        book.radius, book.b, args.eta, max_steps=args.max_steps
    )

    spinner = StatusSpinner()
    codes = await spinner.run(
        f"Encoding {len(dataset)} items...",
        encode_dataset,
        net,
        dataset,
        book,
        env_config,
        args.seed,
        args.threads,
    )
    write_codes(codes, args.out)
    summary = f"✅ Encoded {len(codes)} items to {book.b}-bit codes -> {args.out}"
    if args.labels:
        mean_dpos = float(np.mean([d_pos(c, l, book) for c, l in zip(codes, dataset.labels)]))
        summary += f" (mean d_pos {mean_dpos:.3f}, eta {env_config.eta})"
    spinner.update_status(summary)
    return EXIT_OK


async def _cmd_eval(args: Namespace) -> int:
    query_codes = read_codes(args.query_codes)
    query_labels = read_labels(args.query_labels)
    db_codes = read_codes(args.db_codes)
    db_labels = read_labels(args.db_labels)
    if len(query_codes) != len(query_labels) or len(db_codes) != len(db_labels):
        raise ValueError("Code and label files disagree on the number of items")

    spinner = StatusSpinner()
    report = await spinner.run(
        f"Ranking {len(db_codes)} database items for {len(query_codes)} queries...",
        mean_average_precision,
        query_codes,
        query_labels,
        db_codes,
        db_labels,
        args.topk,
        threads=args.threads,
    )
    spinner.update_status(f"✅ Evaluation: mAP {report.map:.4f}")

    baseline = None
    if args.random_baseline:
        width = db_codes[0].width
        floor = mean_average_precision(
            random_codes(len(query_codes), width, args.seed),
            query_labels,
            random_codes(len(db_codes), width, args.seed + 1),
            db_labels,
            args.topk,
            threads=args.threads,
        )
        baseline = floor.map
    generate_retrieval_report(report, baseline)
    print(f"map\t{report.map:.6f}")
    if args.out_report:
        lines = report.lines()
        if baseline is not None:
            lines.insert(1, f"random_map\t{baseline:.6f}")
        write_output(args.out_report, lines)
    return EXIT_OK


async def _cmd_sweep(args: Namespace) -> int:
    book = read_codebook(args.codebook)
    config = load_train_config(args.config)
    train = load_features(*_split_paths(args.data_prefix, "train"))
    query = load_features(*_split_paths(args.data_prefix, "query"), split="query")
    database = load_features(*_split_paths(args.data_prefix, "database"), split="database")

    spinner = StatusSpinner(unit="points")
    if args.param == "eta":
        points = await spinner.run(
            f"Sweeping eta over {args.values} (retraining per value)...",
            sweep_eta,
            train,
            query,
            database,
            book,
            config,
            args.values,
            args.seed,
            args.topk,
            args.threads,
            spinner.update_progress,
        )
    else:
        if args.model:
            net = _check_model_fits(train, book, args.model)
        else:
            net = (
                await spinner.run(
                    "Training the network for the M sweep...",
                    run_training,
                    train,
                    book,
                    config,
                    timed=False,
                )
            ).network
        points = await spinner.run(
            f"Sweeping M over {args.values}...",
            sweep_max_steps,
            net,
            query,
            database,
            book,
            config,
            args.values,
            args.seed,
            args.topk,
            args.threads,
            spinner.update_progress,
        )
    spinner.update_status(f"✅ Sweep over {args.param}: {len(points)} points")

    table = sweep_table(args.param, points)
    generate_sweep_report(args.param, sweep_rows(points))
    print("\n".join(table))
    if args.out:
        write_output(args.out, table)
    return EXIT_OK


def build_parser() -> ArgumentParser:
    """Argument parser with one subparser per command."""
    parser = ArgumentParser(
        prog="drlhash",
        description="Learn binary hash codes by Q-learning bit flips toward BCH class codewords.",
        epilog=_FORMATS,
        formatter_class=RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("codebook", help="build a BCH class codebook")
    p.add_argument("--classes", type=int, required=True, help="number of classes C")
    p.add_argument("--bits", type=int, required=True, help="code width b")
    p.add_argument("--seed", type=int, default=0, help="padding-bit seed (default 0)")
    p.add_argument("--out", required=True, help="codebook output path")

    p = sub.add_parser("synth", help="write a synthetic Gaussian dataset")
    p.add_argument("--classes", type=int, default=10)
    p.add_argument("--per-class", type=int, default=250, help="items per class")
    p.add_argument("--dim", type=int, default=32, help="feature dimension d_f")
    p.add_argument("--spread", type=float, default=0.15, help="noise std around centers")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument(
        "--out-prefix",
        required=True,
        help="writes PREFIX.{train,query,database}.{fv,labels}",
    )
    p.add_argument(
        "--exclude-train",
        action="store_true",
        help="keep train items out of the database split",
    )

    p = sub.add_parser("train", help="train a Q-network")
    p.add_argument("--features", required=True, help="training feature file")
    p.add_argument("--labels", required=True, help="training labels file")
    p.add_argument("--codebook", required=True)
    p.add_argument("--config", help="hyperparameter file (defaults when omitted)")
    p.add_argument("--out-model", required=True)
    p.add_argument("--log", required=True, help="training log (TSV)")
    p.add_argument(
        "--threads",
        type=int,
        default=0,
        help="1 selects the reference path with an untimed, reproducible log",
    )

    p = sub.add_parser("encode", help="encode items with a trained model")
    p.add_argument("--model", required=True)
    p.add_argument("--features", required=True)
    p.add_argument("--labels", help="optional labels; reports mean d_pos when given")
    p.add_argument("--codebook", required=True)
    p.add_argument("--seed", type=int, default=0, help="run seed for the start codes")
    p.add_argument("--eta", type=int, help="threshold (default floor(R/2))")
    p.add_argument("--max-steps", type=int, help="step cap M (default b)")
    p.add_argument("--out", required=True, help="code export path")
    p.add_argument("--threads", type=int, default=1)

    p = sub.add_parser("eval", help="Hamming-ranking retrieval metrics")
    p.add_argument("--query-codes", required=True)
    p.add_argument("--query-labels", required=True)
    p.add_argument("--db-codes", required=True)
    p.add_argument("--db-labels", required=True)
    p.add_argument("--topk", type=int, default=DEFAULT_TOP_K)
    p.add_argument("--out-report", help="write the report as TSV lines")
    p.add_argument(
        "--random-baseline",
        action="store_true",
        help="also score uniformly random codes of the same width",
    )
    p.add_argument("--seed", type=int, default=0, help="seed for --random-baseline")
    p.add_argument("--threads", type=int, default=1)

    p = sub.add_parser("sweep", help="mAP as a function of eta or M")
    p.add_argument("--param", choices=SWEEP_PARAMS, required=True)
    p.add_argument("--values", type=int, nargs="+", required=True)
    p.add_argument(
        "--data-prefix",
        required=True,
        help="reads PREFIX.{train,query,database}.{fv,labels} as written by synth",
    )
    p.add_argument("--codebook", required=True)
    p.add_argument("--config")
    p.add_argument("--model", help="reuse a trained model for an M sweep")
    p.add_argument("--seed", type=int, default=0, help="run seed for encoding")
    p.add_argument("--topk", type=int, default=DEFAULT_TOP_K)
    p.add_argument("--out", help="write the sweep table")
    p.add_argument("--threads", type=int, default=1)
    return parser


_COMMANDS = {
    "codebook": _cmd_codebook,
    "synth": _cmd_synth,
    "train": _cmd_train,
    "encode": _cmd_encode,
    "eval": _cmd_eval,
    "sweep": _cmd_sweep,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Parse ``argv`` and run one command.

    Returns:
        0 on success, 2 on infeasible parameters, 1 on any other failure.
    """
    args = build_parser().parse_args(argv)
    handler = _COMMANDS[args.command]
    try:
        result = handler(args)
        if not isinstance(result, int):
            result = run(result)
        return result
    except InfeasibleParameters as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (DrlhashError, OSError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_FAILURE


__all__: List[str] = ["build_parser", "main"]
