"""File formats: codebooks, code exports, features, labels, configs, logs.

Text files are UTF-8 with LF endings; parent directories are created on
write. Readers validate as they parse and raise ``FormatError`` subclasses
naming the file and line.
"""

from __future__ import annotations

from dataclasses import fields
from os import makedirs, path
from struct import calcsize, pack, unpack_from
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .bch import Codebook
from .constants import CODEBOOK_HEADER_PREFIX, FEATURE_MAGIC
from .errors import BadMagic, ConfigError, EmptyLabelLine, FormatError
from .hamming import BinaryCode, make_label_set
from .models import EnvConfig, EpochStats, TrainConfig

_FEATURE_HEADER = f"<{len(FEATURE_MAGIC)}sII"
LOG_COLUMNS = (
    "epoch",
    "epsilon",
    "mean_reward",
    "mean_len",
    "mean_terminal_dpos",
    "wall_seconds",
)


def _ensure_parent(file: str) -> None:
    makedirs(path.dirname(path.abspath(file)) or ".", exist_ok=True)


def write_output(file: str, lines: Iterable[str], header: str = "") -> None:
    """Write lines to a file (LF endings), creating the parent directory.

    Args:
        file: Output file path.
        lines: Lines to write.
        header: Optional header text to prepend.
    """
    lines = list(lines)
    _ensure_parent(file)
    with open(file, "w", encoding="utf-8", newline="\n") as f:
        if header:
            f.write(header)
            if not header.endswith("\n"):
                f.write("\n")
        f.write("\n".join(lines) + ("\n" if lines else ""))


def _read_lines(file: str) -> List[str]:
    with open(file, "r", encoding="utf-8") as f:
        return f.read().splitlines()


def codebook_header(book: Codebook) -> str:
    return (
        f"{CODEBOOK_HEADER_PREFIX} b={book.b} C={book.num_classes} "
        f"n={book.bch_length} D={book.min_distance} R={book.radius} seed={book.pad_seed}"
    )


def write_codebook(book: Codebook, file: str) -> None:
    """Header line, then one codeword per class."""
    write_output(file, (str(cw) for cw in book.codewords), codebook_header(book))


def _parse_header_fields(header: str, file: str) -> Dict[str, int]:
    if not header.startswith(CODEBOOK_HEADER_PREFIX):
        raise BadMagic(f"{file}: not a codebook file")
    values: Dict[str, int] = {}
    for token in header[len(CODEBOOK_HEADER_PREFIX) :].split():
        key, sep, value = token.partition("=")
        if not sep:
            raise FormatError(f"{file}: malformed header token {token!r}")
        try:
            values[key] = int(value)
        except ValueError as e:
            raise FormatError(f"{file}: header value {token!r} is not an integer") from e
    missing = {"b", "C", "n", "D", "R", "seed"} - set(values)
    if missing:
        raise FormatError(f"{file}: header lacks {', '.join(sorted(missing))}")
    return values


def read_codebook(file: str) -> Codebook:
    """Parse a codebook written by ``write_codebook``."""
    lines = _read_lines(file)
    if not lines:
        raise FormatError(f"{file}: empty codebook file")
    meta = _parse_header_fields(lines[0], file)
    codewords = _parse_codes(lines[1:], file, first_line=2)
    if len(codewords) != meta["C"]:
        raise FormatError(f"{file}: header says C={meta['C']}, found {len(codewords)}")
    if any(cw.width != meta["b"] for cw in codewords):
        raise FormatError(f"{file}: codeword width differs from b={meta['b']}")
    return Codebook(
        b=meta["b"],
        num_classes=meta["C"],
        codewords=tuple(codewords),
        bch_length=meta["n"],
        min_distance=meta["D"],
        radius=meta["R"],
        pad_seed=meta["seed"],
    )


def _parse_codes(lines: Sequence[str], file: str, first_line: int = 1) -> List[BinaryCode]:
    codes = []
    for lineno, line in enumerate(lines, start=first_line):
        if not line.strip():
            continue
        try:
            codes.append(BinaryCode.parse(line))
        except ValueError as e:
            raise FormatError(f"{file}:{lineno}: {e}") from e
    return codes


def write_codes(codes: Sequence[BinaryCode], file: str) -> None:
    """One code per line, bit 0 first."""
    write_output(file, (str(c) for c in codes))


def read_codes(file: str) -> List[BinaryCode]:
    """Read a code export; every line must have the same width."""
    codes = _parse_codes(_read_lines(file), file)
    if not codes:
        raise FormatError(f"{file}: no codes")
    if any(c.width != codes[0].width for c in codes):
        raise FormatError(f"{file}: codes have mixed widths")
    return codes


def write_features(features: np.ndarray, file: str) -> None:
    """Magic, uint32 n, uint32 d_f, then n * d_f little-endian float32 row-major."""
    features = np.asarray(features)
    if features.ndim != 2:
        raise ValueError(f"Features must be 2-D, got shape {features.shape}")
    n, d_f = features.shape
    _ensure_parent(file)
    with open(file, "wb") as f:
        f.write(pack(_FEATURE_HEADER, FEATURE_MAGIC, n, d_f))
        f.write(np.ascontiguousarray(features, dtype="<f4").tobytes())


def read_features(file: str) -> np.ndarray:
    """Read a feature file into an (n, d_f) float64 array."""
    with open(file, "rb") as f:
        data = f.read()
    size = calcsize(_FEATURE_HEADER)
    if len(data) < size or not data.startswith(FEATURE_MAGIC):
        raise BadMagic(f"{file}: not a feature file")
    _, n, d_f = unpack_from(_FEATURE_HEADER, data)
    payload = data[size:]
    if len(payload) != n * d_f * 4:
        raise FormatError(
            f"{file}: header promises {n}x{d_f} floats, found {len(payload) // 4}"
        )
    features = np.frombuffer(payload, dtype="<f4").astype(np.float64).reshape(n, d_f)
    if not np.all(np.isfinite(features)):
        raise FormatError(f"{file}: non-finite feature values")
    return features


def write_labels(labels: Sequence[Sequence[int]], file: str) -> None:
    """One line per item, comma-separated class indices."""
    write_output(file, (",".join(str(c) for c in item) for item in labels))


def read_labels(file: str) -> List[Tuple[int, ...]]:
    """Parse a labels file into sorted, duplicate-free class tuples."""
    lines = _read_lines(file)
    while lines and not lines[-1].strip():
        lines.pop()
    labels = []
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            raise EmptyLabelLine(f"{file}:{lineno}: empty label line")
        try:
            labels.append(make_label_set(int(tok) for tok in line.split(",")))
        except ValueError as e:
            raise FormatError(f"{file}:{lineno}: bad class index in {line!r}") from e
    return labels


def _convert(name: str, text: str, default):
    if name == "hidden":
        return tuple(int(tok) for tok in text.replace(",", " ").split())
    if name in ("eta", "max_steps"):
        return int(text)
    if isinstance(default, int):
        return int(text)
    return float(text)


def load_train_config(file: Optional[str]) -> TrainConfig:
    """Read a flat ``key = value`` file; missing keys keep their defaults.

    Raises:
        ConfigError: on unknown keys, malformed lines or bad values.
    """
    if file is None:
        return TrainConfig()
    defaults = {f.name: f.default for f in fields(TrainConfig)}
    values = {}
    for lineno, raw in enumerate(_read_lines(file), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = (part.strip() for part in line.partition("="))
        if not sep or not key:
            raise ConfigError(f"{file}:{lineno}: expected 'key = value'")
        if key not in defaults:
            raise ConfigError(f"{file}:{lineno}: unknown key '{key}'")
        try:
            values[key] = _convert(key, value, defaults[key])
        except ValueError as e:
            raise ConfigError(f"{file}:{lineno}: bad value for '{key}': {value!r}") from e
    try:
        return TrainConfig(**values)
    except ValueError as e:
        raise ConfigError(f"{file}: {e}") from e


def _format_value(value) -> str:
    if isinstance(value, tuple):
        return ",".join(str(v) for v in value)
    return str(value)


def write_training_log(
    file: str, config: TrainConfig, env_config: EnvConfig, epochs: Sequence[EpochStats]
) -> None:
    """Effective configuration as ``# key = value`` lines, then one TSV line per epoch."""
    header = [f"# {k} = {_format_value(v)}" for k, v in config.items()]
    header += [
        f"# effective_eta = {env_config.eta}",
        f"# effective_max_steps = {env_config.max_steps}",
        "# " + "\t".join(LOG_COLUMNS),
    ]
    rows = [
        f"{s.epoch}\t{s.epsilon:.6f}\t{s.mean_reward:.6f}\t{s.mean_length:.6f}"
        f"\t{s.mean_terminal_dpos:.6f}\t{s.wall_seconds:.3f}"
        for s in epochs
    ]
    write_output(file, rows, "\n".join(header))


def read_training_log(file: str) -> List[Dict[str, float]]:
    """Epoch rows of a training log as dicts keyed by column name."""
    rows = []
    for line in _read_lines(file):
        if not line.strip() or line.startswith("#"):
            continue
        rows.append(dict(zip(LOG_COLUMNS, (float(v) for v in line.split("\t")))))
    return rows


__all__ = [
    "LOG_COLUMNS",
    "codebook_header",
    "load_train_config",
    "read_codebook",
    "read_codes",
    "read_features",
    "read_labels",
    "read_training_log",
    "write_codebook",
    "write_codes",
    "write_features",
    "write_labels",
    "write_output",
    "write_training_log",
]
