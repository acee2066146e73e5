"""Hyperparameter sweeps over the termination threshold and the step cap.

An eta sweep retrains one network per value; an M sweep trains (or loads)
a single network and only re-encodes with each step cap.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, List, Optional, Sequence, Tuple

from .bch import Codebook
from .constants import DEFAULT_TOP_K
from .dataset import Dataset, encode_dataset
from .evaluation import RetrievalReport, mean_average_precision
from .models import EnvConfig, TrainConfig
from .qnetwork import QNetwork
from .trainer import run_training

SWEEP_PARAMS = ("eta", "M")


@dataclass(frozen=True)
class SweepPoint:
    value: int
    report: RetrievalReport


def evaluate_network(
    net: QNetwork,
    query: Dataset,
    database: Dataset,
    book: Codebook,
    env_config: EnvConfig,
    run_seed: int,
    top_k: int = DEFAULT_TOP_K,
    threads: int = 1,
) -> RetrievalReport:
    """Encode both sides with ``net`` and score query-vs-database retrieval."""
    q_codes = encode_dataset(net, query, book, env_config, run_seed, threads)
    db_codes = encode_dataset(net, database, book, env_config, run_seed, threads)
    return mean_average_precision(
        q_codes, query.labels, db_codes, database.labels, top_k=top_k, threads=threads
    )


def sweep_max_steps(
    net: QNetwork,
    query: Dataset,
    database: Dataset,
    book: Codebook,
    config: TrainConfig,
    values: Sequence[int],
    run_seed: int,
    top_k: int = DEFAULT_TOP_K,
    threads: int = 1,
    progress_callback: Optional[Callable[[int, int], None]] = None,
) -> List[SweepPoint]:
    """Score one trained network under every step cap in ``values``."""
    points = []
    for done, steps in enumerate(values, start=1):
        env_config = EnvConfig.for_codebook(
            book.radius, book.b, config.eta, config.sigma, max_steps=steps
        )
        report = evaluate_network(
            net, query, database, book, env_config, run_seed, top_k, threads
        )
        points.append(SweepPoint(steps, report))
        if progress_callback:
            progress_callback(done, len(values))
    return points


def sweep_eta(
    train: Dataset,
    query: Dataset,
    database: Dataset,
    book: Codebook,
    config: TrainConfig,
    values: Sequence[int],
    run_seed: int,
    top_k: int = DEFAULT_TOP_K,
    threads: int = 1,
    progress_callback: Optional[Callable[[int, int], None]] = None,
) -> List[SweepPoint]:
    """Retrain with each threshold in ``values`` and score the result.

    Raises:
        ValueError: if a value exceeds the codebook radius.
    """
    if bad := [v for v in values if not 0 <= v <= book.radius]:
        raise ValueError(f"eta values {bad} fall outside [0, {book.radius}]")
    points = []
    for done, eta in enumerate(values, start=1):
        result = run_training(train, book, replace(config, eta=eta), timed=False)
        report = evaluate_network(
            result.network, query, database, book, result.env_config, run_seed, top_k, threads
        )
        points.append(SweepPoint(eta, report))
        if progress_callback:
            progress_callback(done, len(values))
    return points


def sweep_table(param: str, points: Sequence[SweepPoint]) -> List[str]:
    """Tab-separated ``value map`` table with a header naming the parameter."""
    return [f"{param}\tmap"] + [f"{p.value}\t{p.report.map:.6f}" for p in points]


def sweep_rows(points: Sequence[SweepPoint]) -> List[Tuple[int, float]]:
    return [(p.value, p.report.map) for p in points]


__all__ = [
    "SWEEP_PARAMS",
    "SweepPoint",
    "evaluate_network",
    "sweep_eta",
    "sweep_max_steps",
    "sweep_rows",
    "sweep_table",
]
