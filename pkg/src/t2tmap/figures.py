"""Matplotlib figure rendering for evaluation reports.

The matplotlib import is deferred and forced onto the Agg backend so that
report paths work headless and nothing heavy loads unless figures are
actually requested.
"""

from __future__ import annotations

from .wer import WerReport


def _plt():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def save_error_breakdown(report: WerReport, path: str) -> None:
    """Bar chart of substitution/deletion/insertion totals."""
    plt = _plt()
    fig, ax = plt.subplots(figsize=(5, 4))
    labels = ["substitutions", "deletions", "insertions"]
    values = [report.substitutions, report.deletions, report.insertions]
    ax.bar(labels, values, color=["#4c72b0", "#dd8452", "#55a868"])
    ax.set_ylabel("count")
    ax.set_title(f"errors by type (WER {report.wer:.3f})")
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def save_wer_histogram(report: WerReport, path: str, bins: int = 20) -> None:
    """Histogram of per-utterance error rates (infinite rates clipped)."""
    plt = _plt()
    rates = [
        min(row.wer, 2.0) for row in report.utterances if row.ref_words > 0
    ]
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.hist(rates, bins=bins, range=(0.0, 2.0), color="#4c72b0")
    ax.set_xlabel("per-utterance WER (clipped at 2.0)")
    ax.set_ylabel("utterances")
    ax.set_title("error rate distribution")
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def save_summary_chart(
    labels: list[str], wers: list[float], path: str
) -> None:
    """Bar chart comparing corpus WER across systems."""
    plt = _plt()
    fig, ax = plt.subplots(figsize=(max(5, 1.2 * len(labels)), 4))
    ax.bar(labels, wers, color="#4c72b0")
    for i, value in enumerate(wers):
        ax.text(i, value, f"{value:.3f}", ha="center", va="bottom")
    ax.set_ylabel("WER")
    ax.set_title("word error rate by system")
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
