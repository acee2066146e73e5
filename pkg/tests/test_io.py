"""Tests for drlhash.io: file formats, config parsing and training logs."""

# pylint: disable=missing-function-docstring
from pathlib import Path

import numpy as np
from pytest import raises

from drlhash import io
from drlhash.errors import BadMagic, ConfigError, EmptyLabelLine, FormatError
from drlhash.hamming import BinaryCode
from drlhash.models import EnvConfig, EpochStats, TrainConfig


def test_codebook_file_roundtrip_and_header(book16, tmp_path: Path):
    path = tmp_path / "nested" / "book.txt"
    io.write_codebook(book16, str(path))
    text = path.read_text(encoding="utf-8")
    first = text.splitlines()[0]
    assert first == "# drlh-codebook v1 b=16 C=10 n=15 D=7 R=3 seed=7"
    assert len(text.splitlines()) == 11
    assert "\r" not in text

    loaded = io.read_codebook(str(path))
    assert loaded == book16

    again = tmp_path / "again.txt"
    io.write_codebook(book16, str(again))
    assert again.read_bytes() == path.read_bytes()


def test_codebook_reader_errors(tmp_path: Path):
    bad = tmp_path / "bad.txt"
    bad.write_text("hello\n0101\n", encoding="utf-8")
    with raises(BadMagic):
        io.read_codebook(str(bad))

    short = tmp_path / "short.txt"
    short.write_text("# drlh-codebook v1 b=4 C=3 n=7 D=3 R=1 seed=0\n0101\n0011\n", encoding="utf-8")
    with raises(FormatError):
        io.read_codebook(str(short))

    missing = tmp_path / "missing.txt"
    missing.write_text("# drlh-codebook v1 b=4 C=1\n0101\n", encoding="utf-8")
    with raises(FormatError):
        io.read_codebook(str(missing))


def test_codes_roundtrip_and_validation(tmp_path: Path):
    codes = [BinaryCode.parse("1010"), BinaryCode.parse("0001")]
    path = tmp_path / "codes.txt"
    io.write_codes(codes, str(path))
    assert path.read_text(encoding="utf-8") == "1010\n0001\n"
    assert io.read_codes(str(path)) == codes

    path.write_text("1010\n001\n", encoding="utf-8")
    with raises(FormatError):
        io.read_codes(str(path))
    path.write_text("10x0\n", encoding="utf-8")
    with raises(FormatError):
        io.read_codes(str(path))


def test_feature_file_layout(tmp_path: Path):
    path = tmp_path / "x.fv"
    io.write_features(np.array([[1.0, 2.0, 3.0]]), str(path))
    data = path.read_bytes()
    assert data[:7] == b"DRLHFV1"
    assert data[7:15] == (1).to_bytes(4, "little") + (3).to_bytes(4, "little")
    assert len(data) == 15 + 12
    assert io.read_features(str(path)).tolist() == [[1.0, 2.0, 3.0]]

    path.write_bytes(b"NOTFEAT" + data[7:])
    with raises(BadMagic):
        io.read_features(str(path))
    path.write_bytes(data[:-4])
    with raises(FormatError):
        io.read_features(str(path))


def test_labels_parsing(tmp_path: Path):
    path = tmp_path / "y.labels"
    path.write_text("2,5\n3\n5,2,2\n\n", encoding="utf-8")
    assert io.read_labels(str(path)) == [(2, 5), (3,), (2, 5)]

    path.write_text("1\n\n2\n", encoding="utf-8")
    with raises(EmptyLabelLine):
        io.read_labels(str(path))
    path.write_text("1,a\n", encoding="utf-8")
    with raises(FormatError):
        io.read_labels(str(path))
    path.write_text("0\n2,-1\n", encoding="utf-8")
    with raises(FormatError, match="y.labels:2"):
        io.read_labels(str(path))

    io.write_labels([(0,), (1, 4)], str(path))
    assert path.read_text(encoding="utf-8") == "0\n1,4\n"


def test_config_defaults_and_overrides(tmp_path: Path):
    assert io.load_train_config(None) == TrainConfig()
    path = tmp_path / "train.cfg"
    path.write_text(
        "# tiny run\nepochs = 3\nhidden = 64, 32\n\nlearning_rate = 0.01  # faster\neta = 1\n",
        encoding="utf-8",
    )
    config = io.load_train_config(str(path))
    assert config.epochs == 3
    assert config.hidden == (64, 32)
    assert config.learning_rate == 0.01
    assert config.eta == 1
    assert config.gamma == 0.9


def test_config_errors_name_the_key(tmp_path: Path):
    path = tmp_path / "train.cfg"
    path.write_text("epochs = 3\nmomentum = 0.9\n", encoding="utf-8")
    with raises(ConfigError, match="momentum"):
        io.load_train_config(str(path))
    path.write_text("epochs = many\n", encoding="utf-8")
    with raises(ConfigError, match="epochs"):
        io.load_train_config(str(path))
    path.write_text("gamma = 1.5\n", encoding="utf-8")
    with raises(ConfigError, match="gamma"):
        io.load_train_config(str(path))
    path.write_text("just words\n", encoding="utf-8")
    with raises(ConfigError):
        io.load_train_config(str(path))


def test_training_log_header_and_rows(tmp_path: Path):
    path = tmp_path / "train.log"
    stats = [
        EpochStats(1, 1.0, -2.5, 7.0, 3.25, 0.0),
        EpochStats(2, 0.55, 1.125, 4.5, 1.5, 0.0),
    ]
    io.write_training_log(str(path), TrainConfig(epochs=2), EnvConfig(eta=1, max_steps=16), stats)
    lines = path.read_text(encoding="utf-8").splitlines()
    assert "# gamma = 0.9" in lines
    assert "# hidden = 512,512" in lines
    assert "# eta = None" in lines
    assert "# effective_eta = 1" in lines
    assert "# effective_max_steps = 16" in lines
    assert lines[-2] == "1\t1.000000\t-2.500000\t7.000000\t3.250000\t0.000"

    rows = io.read_training_log(str(path))
    assert [r["epoch"] for r in rows] == [1.0, 2.0]
    assert rows[1]["mean_terminal_dpos"] == 1.5


def test_write_output_creates_parent(tmp_path: Path):
    target = tmp_path / "a" / "b" / "out.txt"
    io.write_output(str(target), ["x", "y"], header="# head")
    assert target.read_text(encoding="utf-8") == "# head\nx\ny\n"
