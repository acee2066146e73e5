"""drl-hash package public API."""

from .bch import Codebook, build_codebook
from .cli import main  # re-export for convenience
from .hamming import BinaryCode

__all__ = ["BinaryCode", "Codebook", "build_codebook", "main"]
