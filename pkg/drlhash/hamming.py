"""Packed binary codes and Hamming arithmetic.

Bit index 0 is the leftmost character of the text form and the first flip
action. Codes pack into 64-bit words most-significant-bit first, so bit ``i``
lives in word ``i // 64`` at position ``63 - i % 64``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .constants import WORD_BITS
from .errors import (
    EmptyLabelSet,
    IndexOutOfRange,
    NoNegativeClasses,
    WidthMismatch,
)

if TYPE_CHECKING:
    from .bch import Codebook

LabelSet = Tuple[int, ...]

# Popcount of every byte value.
_POPCOUNT_LUT = np.array([bin(i).count("1") for i in range(256)], dtype=np.int64)


def _word_count(width: int) -> int:
    return (width + WORD_BITS - 1) // WORD_BITS


@dataclass(frozen=True)
class BinaryCode:
    """A vertex of the b-bit Hamming cube.

    Attributes:
        width: Number of bits b.
        words: Packed 64-bit words; positions >= ``width`` are zero.
    """

    width: int
    words: Tuple[int, ...]

    def __post_init__(self):
        if self.width < 1:
            raise ValueError(f"Code width must be positive, got {self.width}")
        if len(self.words) != _word_count(self.width):
            raise ValueError(
                f"Width {self.width} needs {_word_count(self.width)} words, "
                f"got {len(self.words)}"
            )
        spare = len(self.words) * WORD_BITS - self.width
        if spare and self.words[-1] & ((1 << spare) - 1):
            raise ValueError("Bits beyond the code width must be zero")

    @classmethod
    def zeros(cls, width: int) -> BinaryCode:
        """All-zero code of the given width."""
        return cls(width, (0,) * _word_count(width))

    @classmethod
    def from_bits(cls, bits: Iterable[int]) -> BinaryCode:
        """Pack a 0/1 sequence, bit 0 first."""
        arr = np.asarray(list(bits) if not isinstance(bits, np.ndarray) else bits)
        arr = arr.astype(np.uint8).ravel()
        if arr.size and arr.max() > 1:
            raise ValueError("Bits must be 0 or 1")
        width = int(arr.size)
        padded = np.zeros(_word_count(width) * WORD_BITS, dtype=np.uint8)
        padded[:width] = arr
        raw = np.packbits(padded).tobytes()
        words = tuple(
            int.from_bytes(raw[i : i + 8], "big") for i in range(0, len(raw), 8)
        )
        return cls(width, words)

    @classmethod
    def parse(cls, text: str) -> BinaryCode:
        """Parse a string of ``0``/``1`` characters, bit 0 first."""
        text = text.strip()
        if not text or set(text) - {"0", "1"}:
            raise ValueError(f"Not a binary code string: {text!r}")
        return cls.from_bits(int(ch) for ch in text)

    def to_bits(self) -> np.ndarray:
        """Unpack into a (width,) uint8 array."""
        raw = b"".join(w.to_bytes(8, "big") for w in self.words)
        return np.unpackbits(np.frombuffer(raw, dtype=np.uint8))[: self.width]

    def bit(self, k: int) -> int:
        """Value of bit ``k``."""
        _check_index(self, k)
        return (self.words[k // WORD_BITS] >> (WORD_BITS - 1 - k % WORD_BITS)) & 1

    def __str__(self) -> str:
        return "".join(str(b) for b in self.to_bits())


def _check_index(code: BinaryCode, k: int) -> None:
    if not 0 <= k < code.width:
        raise IndexOutOfRange(f"Bit index {k} outside [0, {code.width})")


def hamming_distance(a: BinaryCode, x: BinaryCode) -> int:
    """Number of differing positions (XOR + popcount over packed words).

    Raises:
        WidthMismatch: if the widths differ.
    """
    if a.width != x.width:
        raise WidthMismatch(f"Widths differ: {a.width} vs {x.width}")
    return sum((u ^ v).bit_count() for u, v in zip(a.words, x.words))


def flip_bit(code: BinaryCode, k: int) -> BinaryCode:
    """Return a copy of ``code`` with bit ``k`` flipped.

    Raises:
        IndexOutOfRange: if ``k`` is not a valid bit index.
    """
    _check_index(code, k)
    words = list(code.words)
    words[k // WORD_BITS] ^= 1 << (WORD_BITS - 1 - k % WORD_BITS)
    return BinaryCode(code.width, tuple(words))


def make_label_set(
    classes: Iterable[int], num_classes: Optional[int] = None
) -> LabelSet:
    """Normalize class indices into a sorted, duplicate-free LabelSet.

    Raises:
        EmptyLabelSet: if ``classes`` is empty.
        ValueError: if an index is negative, or not below ``num_classes``
            when that is given.
    """
    labels = tuple(sorted(set(int(c) for c in classes)))
    if not labels:
        raise EmptyLabelSet("Label set is empty")
    if labels[0] < 0:
        raise ValueError(f"Negative class index in {labels}")
    if num_classes is not None and labels[-1] >= num_classes:
        raise ValueError(f"Label indices {labels} outside [0, {num_classes})")
    return labels


def d_pos(code: BinaryCode, labels: LabelSet, book: Codebook) -> int:
    """Distance to the nearest ground-truth class codeword."""
    if not labels:
        raise EmptyLabelSet("d_pos needs at least one label")
    return min(hamming_distance(code, book.codewords[c]) for c in labels)


def d_neg(code: BinaryCode, labels: LabelSet, book: Codebook) -> float:
    """Mean distance to the codewords of every class outside ``labels``."""
    negatives = [c for c in range(book.num_classes) if c not in labels]
    if not negatives:
        raise NoNegativeClasses("Labels cover every class")
    return float(
        sum(hamming_distance(code, book.codewords[c]) for c in negatives)
        / len(negatives)
    )


def pack_codes(codes: Sequence[BinaryCode]) -> np.ndarray:
    """Pack codes into an (n, ceil(b / 8)) uint8 matrix for scanning.

    Raises:
        WidthMismatch: if the codes do not share one width.
    """
    if not codes:
        raise ValueError("No codes to pack")
    width = codes[0].width
    if any(c.width != width for c in codes):
        raise WidthMismatch("Codes in one set must share a width")
    bits = np.stack([c.to_bits() for c in codes])
    return np.packbits(bits, axis=1)


def hamming_distances(query: BinaryCode, packed: np.ndarray, width: int) -> np.ndarray:
    """Distances from ``query`` to every row of a ``pack_codes`` matrix."""
    if query.width != width:
        raise WidthMismatch(f"Query width {query.width} != database width {width}")
    q = np.packbits(query.to_bits())
    return _POPCOUNT_LUT[np.bitwise_xor(packed, q)].sum(axis=1)


def rank_distances(dist: np.ndarray, top_k: int) -> np.ndarray:
    """Indices of the ``top_k`` smallest distances, ties by ascending index.

    ``top_k`` is clamped to [1, len(dist)].
    """
    order = np.argsort(dist, kind="stable")
    return order[: max(1, min(top_k, len(order)))]


def rank_packed(
    query: BinaryCode, packed: np.ndarray, width: int, top_k: int
) -> np.ndarray:
    """Top-k row indices of ``packed`` nearest to ``query``."""
    return rank_distances(hamming_distances(query, packed, width), top_k)


def rank_by_distance(
    query: BinaryCode, database: Sequence[BinaryCode], top_k: int
) -> List[int]:
    """Indices of the ``top_k`` nearest database codes.

    Ascending Hamming distance, ties broken by ascending database index;
    ``top_k`` is clamped to the database size.
    """
    if not database:
        raise ValueError("Database is empty")
    if top_k < 1:
        raise ValueError(f"top_k must be >= 1, got {top_k}")
    packed = pack_codes(database)
    return [int(i) for i in rank_packed(query, packed, database[0].width, top_k)]


__all__ = [
    "BinaryCode",
    "LabelSet",
    "d_neg",
    "d_pos",
    "flip_bit",
    "hamming_distance",
    "hamming_distances",
    "make_label_set",
    "pack_codes",
    "rank_by_distance",
    "rank_distances",
    "rank_packed",
]
