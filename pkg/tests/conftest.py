"""Shared fixtures and import-path wiring for the test suite."""

# pylint: disable=missing-function-docstring
from pathlib import Path
from sys import path

from pytest import fixture

ROOT = Path(__file__).resolve().parents[1]
if str(ROOT) not in path:
    path.insert(0, str(ROOT))

from drlhash.bch import Codebook, build_codebook  # noqa: E402  pylint: disable=wrong-import-position
from drlhash.hamming import BinaryCode  # noqa: E402  pylint: disable=wrong-import-position


@fixture(scope="session")
def book16() -> Codebook:
    """C=10, b=16 codebook (BCH(15,5) plus one padding bit)."""
    return build_codebook(10, 16, seed=7)


@fixture(scope="session")
def book8() -> Codebook:
    """C=4, b=8 codebook small enough for quick training runs."""
    return build_codebook(4, 8, seed=0)


def make_book(*codewords: str, radius: int = 0) -> Codebook:
    """Hand-written codebook from 0/1 strings."""
    codes = tuple(BinaryCode.parse(c) for c in codewords)
    return Codebook(
        b=codes[0].width,
        num_classes=len(codes),
        codewords=codes,
        bch_length=codes[0].width,
        min_distance=2 * radius + 1,
        radius=radius,
        pad_seed=0,
    )


@fixture(name="make_book")
def make_book_fixture():
    return make_book
