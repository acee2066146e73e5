"""Hamming-ranking retrieval metrics.

An item is relevant to a query when they share at least one class. Average
precision is taken over the top-k ranked list and normalized by
min(relevant items, k); a query with nothing relevant scores 0.
"""

from __future__ import annotations

from concurrent import futures
from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple

import numpy as np

from .constants import DEFAULT_PRECISION_KS, DEFAULT_TOP_K
from .errors import WidthMismatch
from .hamming import (
    BinaryCode,
    LabelSet,
    hamming_distances,
    pack_codes,
    rank_distances,
)


@dataclass(frozen=True)
class RetrievalReport:
    """Retrieval quality of query codes against database codes."""

    map: float
    precision_at_k: Tuple[Tuple[int, float], ...]
    per_query_ap: Tuple[float, ...]
    top_k: int
    radius_curve: Tuple[Tuple[int, float, float], ...] = ()
    config: Dict[str, str] = field(default_factory=dict)

    def lines(self) -> List[str]:
        """Tab-separated ``key value`` lines followed by the radius block."""
        out = [
            f"map\t{self.map:.6f}",
            f"top_k\t{self.top_k}",
            f"queries\t{len(self.per_query_ap)}",
        ]
        out += [f"precision@{k}\t{v:.6f}" for k, v in self.precision_at_k]
        out += [f"{k}\t{v}" for k, v in sorted(self.config.items())]
        if self.radius_curve:
            out.append("")
            out.append("radius\tprecision\trecall")
            out += [f"{r}\t{p:.6f}\t{rc:.6f}" for r, p, rc in self.radius_curve]
        return out


def _label_matrix(labels: Sequence[LabelSet], num_classes: int) -> np.ndarray:
    matrix = np.zeros((len(labels), num_classes), dtype=bool)
    for i, classes in enumerate(labels):
        matrix[i, list(classes)] = True
    return matrix


def average_precision(relevant_ranked: np.ndarray, total_relevant: int, top_k: int) -> float:
    """AP of a 0/1 relevance list already cut to the top-k prefix."""
    if total_relevant == 0:
        return 0.0
    rel = np.asarray(relevant_ranked, dtype=bool)[:top_k]
    hits = np.cumsum(rel)
    ranks = np.flatnonzero(rel) + 1
    return float(np.sum(hits[rel] / ranks) / min(total_relevant, top_k))


def mean_average_precision(
    query_codes: Sequence[BinaryCode],
    query_labels: Sequence[LabelSet],
    db_codes: Sequence[BinaryCode],
    db_labels: Sequence[LabelSet],
    top_k: int = DEFAULT_TOP_K,
    precision_ks: Sequence[int] = DEFAULT_PRECISION_KS,
    threads: int = 1,
) -> RetrievalReport:
    """Rank the database for every query and summarize retrieval quality.

    Ranking is by Hamming distance with ties broken by database index.

    Raises:
        ValueError: if either side is empty or codes and labels differ in count.
        WidthMismatch: if query and database widths differ.
    """
    if not query_codes or not db_codes:
        raise ValueError("Query and database sets must be nonempty")
    if len(query_codes) != len(query_labels) or len(db_codes) != len(db_labels):
        raise ValueError("Each code needs exactly one label set")
    width = db_codes[0].width
    if any(q.width != width for q in query_codes):
        raise WidthMismatch(f"Query codes do not all have database width {width}")
    if top_k < 1:
        raise ValueError(f"top_k must be >= 1, got {top_k}")

    num_classes = 1 + max(max(l) for l in list(query_labels) + list(db_labels))
    q_matrix = _label_matrix(query_labels, num_classes).astype(np.int64)
    db_matrix = _label_matrix(db_labels, num_classes).astype(np.int64)
    packed = pack_codes(db_codes)
    n_db = len(db_codes)
    ks = [k for k in precision_ks if 1 <= k <= n_db]
    depth = min(n_db, max([top_k, *ks]))

    def _one(qi: int):
        relevant = (db_matrix @ q_matrix[qi]) > 0
        dist = hamming_distances(query_codes[qi], packed, width)
        ranked = rank_distances(dist, depth)
        rel_ranked = relevant[ranked]
        total = int(relevant.sum())
        ap = average_precision(rel_ranked, total, top_k)
        hits = [float(rel_ranked[:k].sum()) / k for k in ks]
        per_radius_all = np.bincount(dist, minlength=width + 1)
        per_radius_rel = np.bincount(dist[relevant], minlength=width + 1)
        return ap, hits, per_radius_all, per_radius_rel, total

    indices = range(len(query_codes))
    if threads <= 1:
        results = [_one(i) for i in indices]
    else:
        with futures.ThreadPoolExecutor(max_workers=threads) as ex:
            results = list(ex.map(_one, indices))

    aps = tuple(r[0] for r in results)
    precision = tuple(
        (k, float(np.mean([r[1][j] for r in results]))) for j, k in enumerate(ks)
    )
    return RetrievalReport(
        map=float(np.mean(aps)),
        precision_at_k=precision,
        per_query_ap=aps,
        top_k=top_k,
        radius_curve=_radius_curve(results, width),
        config={"database": str(n_db), "bits": str(width)},
    )


def _radius_curve(results, width: int) -> Tuple[Tuple[int, float, float], ...]:
    """Mean precision/recall of the Hamming ball lookup for every radius."""
    precision = np.zeros(width + 1)
    recall = np.zeros(width + 1)
    with_relevant = 0
    for _, _, per_all, per_rel, total in results:
        found = np.cumsum(per_all)
        correct = np.cumsum(per_rel)
        precision += np.divide(correct, found, out=np.zeros(width + 1), where=found > 0)
        if total:
            recall += correct / total
            with_relevant += 1
    precision /= len(results)
    if with_relevant:
        recall /= with_relevant
    return tuple((r, float(precision[r]), float(recall[r])) for r in range(width + 1))


__all__ = ["RetrievalReport", "average_precision", "mean_average_precision"]
