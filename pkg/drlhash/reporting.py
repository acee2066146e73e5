"""Framed summary boxes printed at the end of CLI commands."""

from shutil import get_terminal_size
from typing import Iterable, List, Optional, Sequence, Tuple
from unicodedata import east_asian_width

from .bch import Codebook
from .evaluation import RetrievalReport
from .models import EnvConfig, EpochStats


def _report_width() -> int:
    """Terminal width clamped to [60, 120]; 80 when unknown."""
    try:
        cols = get_terminal_size(fallback=(80, 24)).columns
    except OSError:
        cols = 80
    return max(60, min(120, cols))


def _get_display_width(text: str) -> int:
    """Printable width, counting wide glyphs and emoji variants."""
    width = 0
    i = 0
    while i < len(text):
        if i < len(text) - 1 and ord(text[i + 1]) == 0xFE0F:
            width += 1
            i += 2
        elif east_asian_width(text[i]) in ("F", "W"):
            width += 2
            i += 1
        else:
            width += 1
            i += 1
    return width


def _generate_line(message: str) -> None:
    """Print one framed line padded to the report width."""
    width = _report_width()
    padding = max(0, width - _get_display_width(message) - 4)
    print(f"│ {message}" + " " * padding + " │")


def _print_box(title: str, sections: Iterable[Sequence[str]]) -> None:
    width = _report_width()
    print("┌" + "─" * (width - 2) + "┐")
    _generate_line(title)
    for section in sections:
        print("├" + "─" * (width - 2) + "┤")
        for line in section:
            _generate_line(line)
    print("└" + "─" * (width - 2) + "┘")


def generate_codebook_report(book: Codebook, out_path: str) -> None:
    """Summarize a freshly built codebook."""
    _print_box(
        "🔐 CODEBOOK",
        [
            [
                f"Classes: {book.num_classes} | Bits: {book.b} | BCH length n: {book.bch_length}",
                f"Min distance D: {book.min_distance} | Radius R: {book.radius}"
                f" | Default eta: {book.default_eta}",
                f"Padding bits per codeword: {max(0, book.b - book.bch_length)}"
                f" (seed {book.pad_seed})",
            ],
            [f"📁 {out_path}"],
        ],
    )


def generate_training_report(
    epochs: Sequence[EpochStats],
    env_config: EnvConfig,
    outputs: Sequence[str],
) -> None:
    """Summarize a training run: first/last epoch and output files."""
    rows: List[str] = []
    for s in (epochs[0], epochs[-1]) if len(epochs) > 1 else epochs:
        rows.append(
            f"Epoch {s.epoch:>3}: eps {s.epsilon:.3f} | reward {s.mean_reward:8.3f}"
            f" | length {s.mean_length:5.2f} | final d_pos {s.mean_terminal_dpos:5.2f}"
        )
    _print_box(
        "🎯 TRAINING COMPLETE",
        [
            [
                f"eta: {env_config.eta} | sigma: {env_config.sigma}"
                f" | max steps: {env_config.max_steps}"
            ],
            rows,
            [f"📁 {p}" for p in outputs],
        ],
    )


def generate_retrieval_report(report: RetrievalReport, baseline: Optional[float] = None) -> None:
    """Print mAP, precision@k and the random-code floor when given."""
    summary = [
        f"mAP@{report.top_k}: {report.map:.4f} over {len(report.per_query_ap)} queries"
    ]
    if baseline is not None:
        summary.append(f"Random-code floor: {baseline:.4f}")
    precision = [f"precision@{k}: {v:.4f}" for k, v in report.precision_at_k]
    radius = [
        f"Hamming radius {r}: precision {p:.4f} | recall {rc:.4f}"
        for r, p, rc in report.radius_curve[:3]
    ]
    _print_box("📊 RETRIEVAL", [summary, precision or ["(no k within database)"], radius])


def generate_sweep_report(param: str, rows: Sequence[Tuple[int, float]]) -> None:
    """Print one line per swept value with its mAP."""
    best = max(rows, key=lambda r: r[1]) if rows else None
    lines = [
        f"{param} = {value:>3}: mAP {score:.4f}" + ("  ⭐" if (value, score) == best else "")
        for value, score in rows
    ]
    _print_box(f"🧪 SWEEP OVER {param}", [lines])
