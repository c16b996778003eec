"""Word error rate computation and reporting.

Edit operations are counted with a dynamic program that minimizes
(edits, -matches, substitutions) lexicographically, so among all minimal
edit scripts the one with the most matches (and, among those, the fewest
substitutions) is reported.  Deletions/insertions are then fixed by the
sequence lengths: D = |ref| - M - S and I = |hyp| - M - S.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .corpus import Utterance
from .errors import EvalMismatchError


@dataclass(frozen=True)
class EditOps:
    """Aligned-operation counts for one hypothesis/reference pair."""

    matches: int
    substitutions: int
    deletions: int
    insertions: int

    @property
    def errors(self) -> int:
        return self.substitutions + self.deletions + self.insertions


def edit_ops(hypothesis: tuple[str, ...], reference: tuple[str, ...]) -> EditOps:
    """Count matches/substitutions/deletions/insertions between sequences."""
    n_hyp, n_ref = len(hypothesis), len(reference)
    # row[j] = (edits, -matches, substitutions) for the current hyp prefix
    row = [(j, 0, 0) for j in range(n_ref + 1)]
    for i in range(1, n_hyp + 1):
        prev = row
        row = [(i, 0, 0)] + [None] * n_ref
        hyp_tok = hypothesis[i - 1]
        for j in range(1, n_ref + 1):
            e, m, s = prev[j - 1]
            if hyp_tok == reference[j - 1]:
                best = (e, m - 1, s)
            else:
                best = (e + 1, m, s + 1)
            e, m, s = prev[j]  # hypothesis token unmatched: insertion
            if (e + 1, m, s) < best:
                best = (e + 1, m, s)
            e, m, s = row[j - 1]  # reference token unmatched: deletion
            if (e + 1, m, s) < best:
                best = (e + 1, m, s)
            row[j] = best
    _, neg_matches, substitutions = row[n_ref]
    matches = -neg_matches
    return EditOps(
        matches=matches,
        substitutions=substitutions,
        deletions=n_ref - matches - substitutions,
        insertions=n_hyp - matches - substitutions,
    )


@dataclass(frozen=True)
class UtteranceWer:
    """Per-utterance error breakdown."""

    id: str
    ops: EditOps
    ref_words: int

    @property
    def wer(self) -> float:
        if self.ref_words == 0:
            return 0.0 if self.ops.errors == 0 else float("inf")
        return self.ops.errors / self.ref_words


@dataclass(frozen=True)
class WerReport:
    """Corpus-level word error rate with a per-utterance table."""

    utterances: tuple[UtteranceWer, ...]
    matches: int
    substitutions: int
    deletions: int
    insertions: int
    ref_words: int
    hyp_words: int
    wer: float
    nwer: float | None = None

    @property
    def errors(self) -> int:
        return self.substitutions + self.deletions + self.insertions


def nwer(wer: float, reference_wer: float) -> float:
    """Error rate normalized by an external reference system's rate."""
    if not reference_wer > 0:
        raise ValueError(
            f"reference_wer must be positive, got {reference_wer!r}"
        )
    return wer / reference_wer


def relative_reduction(baseline: float, system: float) -> float:
    """Percent reduction of ``system`` relative to ``baseline``."""
    if not baseline > 0:
        raise ValueError(f"baseline must be positive, got {baseline!r}")
    return 100.0 * (baseline - system) / baseline


def corpus_wer(
    hypotheses: list[Utterance],
    references: list[Utterance],
    reference_wer: float | None = None,
) -> WerReport:
    """Score hypotheses against references joined by utterance id.

    Both sides must cover exactly the same ids; rows are reported in
    reference order.  Raises :class:`EvalMismatchError` on id mismatches or
    when the references contain no words at all.
    """
    hyp_by_id = {utt.id: utt.tokens for utt in hypotheses}
    ref_ids = {utt.id for utt in references}
    missing_hyp = sorted(ref_ids - set(hyp_by_id))
    missing_ref = sorted(set(hyp_by_id) - ref_ids)
    if missing_hyp or missing_ref:
        parts = []
        if missing_hyp:
            parts.append(f"ids missing from hypotheses: {missing_hyp[:10]}")
        if missing_ref:
            parts.append(f"ids missing from references: {missing_ref[:10]}")
        raise EvalMismatchError("; ".join(parts))
    rows = []
    totals = {"matches": 0, "substitutions": 0, "deletions": 0, "insertions": 0}
    ref_words = 0
    hyp_words = 0
    for ref in references:
        ops = edit_ops(hyp_by_id[ref.id], ref.tokens)
        rows.append(UtteranceWer(id=ref.id, ops=ops, ref_words=len(ref.tokens)))
        totals["matches"] += ops.matches
        totals["substitutions"] += ops.substitutions
        totals["deletions"] += ops.deletions
        totals["insertions"] += ops.insertions
        ref_words += len(ref.tokens)
        hyp_words += len(hyp_by_id[ref.id])
    if ref_words == 0:
        raise EvalMismatchError("references contain no words")
    errors = (
        totals["substitutions"] + totals["deletions"] + totals["insertions"]
    )
    wer = errors / ref_words
    return WerReport(
        utterances=tuple(rows),
        matches=totals["matches"],
        substitutions=totals["substitutions"],
        deletions=totals["deletions"],
        insertions=totals["insertions"],
        ref_words=ref_words,
        hyp_words=hyp_words,
        wer=wer,
        nwer=None if reference_wer is None else nwer(wer, reference_wer),
    )


def write_report_tsv(report: WerReport, path: str) -> None:
    """Per-utterance rows plus a TOTAL row, tab-separated."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("id\tref_words\tmatch\tsub\tdel\tins\twer\n")
        for row in report.utterances:
            fh.write(
                f"{row.id}\t{row.ref_words}\t{row.ops.matches}\t"
                f"{row.ops.substitutions}\t{row.ops.deletions}\t"
                f"{row.ops.insertions}\t{row.wer:.6f}\n"
            )
        fh.write(
            f"TOTAL\t{report.ref_words}\t{report.matches}\t"
            f"{report.substitutions}\t{report.deletions}\t"
            f"{report.insertions}\t{report.wer:.6f}\n"
        )


def write_report_json(report: WerReport, path: str) -> None:
    """Summary totals as JSON with a fixed key set."""
    payload = {
        "sub": report.substitutions,
        "del": report.deletions,
        "ins": report.insertions,
        "ref_words": report.ref_words,
        "wer": report.wer,
        "nwer": report.nwer,
    }
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
