"""Datasets: file ingestion, synthetic Gaussian classes and batch encoding."""

from __future__ import annotations

from concurrent import futures
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from .bch import Codebook
from .constants import HISTORY_DEPTH, SPLITS
from .environment import HashingEnv
from .errors import ArchitectureMismatch, HeaderMismatch
from .hamming import BinaryCode, LabelSet, make_label_set
from .io import read_features, read_labels
from .models import EnvConfig
from .qnetwork import QNetwork
from .trainer import rollout_greedy


@dataclass(frozen=True)
class Dataset:
    """Feature rows with label sets and split tags.

    Attributes:
        features: (n, d_f) float64 array.
        labels: One LabelSet per item.
        splits: One of ``SPLITS`` per item; splits are disjoint.
        provenance: Where the data came from.
    """

    features: np.ndarray
    labels: Tuple[LabelSet, ...]
    splits: Tuple[str, ...]
    provenance: str = ""

    def __post_init__(self):
        if self.features.ndim != 2:
            raise ValueError(f"Features must be 2-D, got shape {self.features.shape}")
        n = self.features.shape[0]
        if len(self.labels) != n or len(self.splits) != n:
            raise ValueError("features, labels and splits must have equal length")
        if unknown := set(self.splits) - set(SPLITS):
            raise ValueError(f"Unknown split tags {sorted(unknown)}")
        if not np.all(np.isfinite(self.features)):
            raise ValueError("Feature rows must be finite")

    def __len__(self) -> int:
        return self.features.shape[0]

    @property
    def feature_dim(self) -> int:
        return self.features.shape[1]

    @property
    def num_classes(self) -> int:
        """One more than the largest class index present."""
        return 1 + max((max(l) for l in self.labels if l), default=-1)

    def check_classes(self, num_classes: int) -> None:
        """Raise ValueError naming the first item whose labels do not fit."""
        for item, labels in enumerate(self.labels):
            try:
                make_label_set(labels, num_classes)
            except ValueError as e:
                raise ValueError(f"Item {item}: {e}") from e

    def indices(self, split: str) -> np.ndarray:
        """Positions of the items tagged ``split``."""
        return np.array([i for i, s in enumerate(self.splits) if s == split], dtype=int)

    def take(self, positions: Sequence[int], split: str | None = None) -> Dataset:
        """Items at ``positions``, optionally re-tagged."""
        positions = list(positions)
        return Dataset(
            features=self.features[positions],
            labels=tuple(self.labels[i] for i in positions),
            splits=tuple(split or self.splits[i] for i in positions),
            provenance=self.provenance,
        )

    def subset(self, split: str) -> Dataset:
        return self.take(self.indices(split))

    def retrieval_database(self, include_train: bool = True) -> Dataset:
        """Database items, preceded by the train items when ``include_train``."""
        positions = list(self.indices("database"))
        if include_train:
            positions = list(self.indices("train")) + positions
        return self.take(positions, split="database")


def load_features(features_path: str, labels_path: str, split: str = "train") -> Dataset:
    """Read a feature file and its labels file; every item gets ``split``.

    Raises:
        BadMagic: if the feature file lacks the magic.
        HeaderMismatch: if the files disagree on the number of items.
        EmptyLabelLine: if an item has no labels.
    """
    features = read_features(features_path)
    labels = read_labels(labels_path)
    if len(labels) != features.shape[0]:
        raise HeaderMismatch(
            f"{features_path} holds {features.shape[0]} items, "
            f"{labels_path} holds {len(labels)} label lines"
        )
    return Dataset(
        features=features,
        labels=tuple(labels),
        splits=(split,) * len(labels),
        provenance=f"features={features_path} labels={labels_path}",
    )


def synth_gaussian(
    num_classes: int,
    per_class_n: int,
    feature_dim: int,
    spread: float,
    seed: int,
    split_ratios: Tuple[float, float, float] = (0.8, 0.1, 0.1),
) -> Dataset:
    """Gaussian blobs around class centers on the unit sphere.

    Each class is split train/query/database by ``split_ratios``; items are
    single-label and the result is fixed by ``seed``.
    """
    if num_classes < 2 or feature_dim < 2:
        raise ValueError("Need at least 2 classes and 2 feature dimensions")
    if per_class_n < 1 or spread < 0:
        raise ValueError("per_class_n must be >= 1 and spread >= 0")
    if len(split_ratios) != 3 or min(split_ratios) < 0 or sum(split_ratios) <= 0:
        raise ValueError(f"Bad split ratios {split_ratios}")

    rng = np.random.default_rng(seed)
    centers = rng.normal(size=(num_classes, feature_dim))
    centers /= np.linalg.norm(centers, axis=1, keepdims=True)

    ratios = np.asarray(split_ratios, dtype=float) / sum(split_ratios)
    n_train = int(round(ratios[0] * per_class_n))
    n_query = int(round(ratios[1] * per_class_n))
    n_query = min(n_query, per_class_n - n_train)
    tags = (
        ["train"] * n_train
        + ["query"] * n_query
        + ["database"] * (per_class_n - n_train - n_query)
    )

    blocks, labels, splits = [], [], []
    for c in range(num_classes):
        noise = rng.normal(scale=spread, size=(per_class_n, feature_dim))
        blocks.append(centers[c] + noise)
        labels.extend([(c,)] * per_class_n)
        splits.extend(tags)

    return Dataset(
        features=np.vstack(blocks),
        labels=tuple(labels),
        splits=tuple(splits),
        provenance=(
            f"synth_gaussian C={num_classes} n={per_class_n} d={feature_dim} "
            f"spread={spread} seed={seed}"
        ),
    )


def encode_dataset(
    net: QNetwork,
    dataset: Dataset,
    book: Codebook,
    env_config: EnvConfig,
    run_seed: int,
    threads: int = 1,
) -> List[BinaryCode]:
    """Encode every item by following the greedy policy from its seeded start.

    Raises:
        ArchitectureMismatch: if the network does not fit d_f and b.
    """
    expected = dataset.feature_dim + (HISTORY_DEPTH + 1) * book.b
    if net.input_dim != expected or net.output_dim != book.b + 1:
        raise ArchitectureMismatch(
            f"Network maps {net.input_dim}->{net.output_dim}, "
            f"data needs {expected}->{book.b + 1}"
        )
    env = HashingEnv(book, env_config, dataset.feature_dim)

    def _one(item: int) -> BinaryCode:
        state, _ = rollout_greedy(net, env, dataset.features[item], item, run_seed)
        return state.code

    items = range(len(dataset))
    if threads <= 1:
        return [_one(i) for i in items]
    with futures.ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(_one, items))


def random_codes(count: int, width: int, seed: int) -> List[BinaryCode]:
    """Uniformly random codes, the retrieval floor baseline."""
    bits = np.random.default_rng(seed).integers(0, 2, size=(count, width))
    return [BinaryCode.from_bits(row) for row in bits]


def codeword_codes(dataset: Dataset, book: Codebook) -> List[BinaryCode]:
    """Each item's first label codeword (an oracle encoder)."""
    return [book.codewords[labels[0]] for labels in dataset.labels]


__all__ = [
    "Dataset",
    "codeword_codes",
    "encode_dataset",
    "load_features",
    "random_codes",
    "synth_gaussian",
]
