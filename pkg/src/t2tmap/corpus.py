"""Corpus loading, text normalization, and TSV serialization.

File formats (all UTF-8, LF line endings, tab-separated):

* paired corpus:  ``id<TAB>hypothesis<TAB>reference`` or with a fourth
  ``weight`` column.
* N-best corpus:  ``id<TAB>rank<TAB>score<TAB>tokens``, ranks contiguous
  from 1 per id, scores non-decreasing with rank.
* transcripts:    ``id<TAB>text`` (text may be empty).
"""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass, field

from .errors import CorpusFormatError

#: Tokens reserved for internal markup; they may never appear in input text.
RESERVED_TOKENS = ("<eps>", "<s>", "</s>", "<unk>")

_PUNCT_TABLE = str.maketrans("", "", '.,!?;:"()')


def normalize_text(raw: str) -> tuple[str, ...]:
    """Normalize a raw text line into a token tuple.

    Applies NFC unicode normalization, lowercases, strips the punctuation
    characters ``.,!?;:"()``, and splits on whitespace.  Raises
    :class:`CorpusFormatError` if a reserved token survives normalization.
    """
    text = unicodedata.normalize("NFC", raw).lower().translate(_PUNCT_TABLE)
    tokens = tuple(text.split())
    for tok in tokens:
        if tok in RESERVED_TOKENS:
            raise CorpusFormatError(
                f"reserved token {tok!r} is not allowed in input text"
            )
    return tokens


@dataclass(frozen=True)
class Utterance:
    """A single utterance: an id and its token sequence."""

    id: str
    tokens: tuple[str, ...]


@dataclass(frozen=True)
class UtterancePair:
    """A (hypothesis, reference) training pair with an optional weight."""

    id: str
    hypothesis: tuple[str, ...]
    reference: tuple[str, ...]
    weight: float = 1.0

    def __post_init__(self) -> None:
        if not self.reference:
            raise CorpusFormatError(
                f"pair {self.id!r}: reference must not be empty"
            )
        if not self.weight > 0:
            raise CorpusFormatError(
                f"pair {self.id!r}: weight must be positive, got {self.weight!r}"
            )


@dataclass(frozen=True)
class NBestEntry:
    """One ranked candidate in an N-best list."""

    rank: int
    score: float
    tokens: tuple[str, ...]


@dataclass(frozen=True)
class NBestList:
    """All ranked candidates for one utterance id."""

    id: str
    entries: tuple[NBestEntry, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        for pos, entry in enumerate(self.entries, start=1):
            if entry.rank != pos:
                raise CorpusFormatError(
                    f"n-best list {self.id!r}: ranks must be contiguous from 1, "
                    f"expected {pos} got {entry.rank}"
                )
        for prev, cur in zip(self.entries, self.entries[1:]):
            if cur.score < prev.score:
                raise CorpusFormatError(
                    f"n-best list {self.id!r}: scores must be non-decreasing "
                    f"with rank (rank {cur.rank} has {cur.score!r} < {prev.score!r})"
                )


def _open_for_reading(path: str):
    try:
        return open(path, encoding="utf-8")
    except OSError as exc:
        raise CorpusFormatError(f"{path}: {exc.strerror or exc}") from exc


def _split_line(line: str, path: str, lineno: int, ncols: int) -> list[str]:
    cols = line.split("\t")
    if len(cols) != ncols:
        raise CorpusFormatError(
            f"{path}:{lineno}: expected {ncols} tab-separated columns, "
            f"got {len(cols)}"
        )
    return cols


def load_paired_corpus(path: str) -> list[UtterancePair]:
    """Load a paired corpus TSV (3 or 4 columns) into UtterancePair rows."""
    pairs: list[UtterancePair] = []
    seen: set[str] = set()
    with _open_for_reading(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            cols = line.split("\t")
            if len(cols) not in (3, 4):
                raise CorpusFormatError(
                    f"{path}:{lineno}: expected 3 or 4 tab-separated columns, "
                    f"got {len(cols)}"
                )
            utt_id = cols[0]
            if utt_id in seen:
                raise CorpusFormatError(
                    f"{path}:{lineno}: duplicate utterance id {utt_id!r}"
                )
            seen.add(utt_id)
            weight = 1.0
            if len(cols) == 4:
                try:
                    weight = float(cols[3])
                except ValueError:
                    raise CorpusFormatError(
                        f"{path}:{lineno}: invalid weight {cols[3]!r}"
                    ) from None
            try:
                pairs.append(
                    UtterancePair(
                        id=utt_id,
                        hypothesis=normalize_text(cols[1]),
                        reference=normalize_text(cols[2]),
                        weight=weight,
                    )
                )
            except CorpusFormatError as exc:
                raise CorpusFormatError(f"{path}:{lineno}: {exc}") from None
    return pairs


def write_paired_corpus(pairs: list[UtterancePair], path: str) -> None:
    """Write a paired corpus TSV; weight column emitted only when != 1.0."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for pair in pairs:
            row = [pair.id, " ".join(pair.hypothesis), " ".join(pair.reference)]
            if pair.weight != 1.0:
                row.append(repr(pair.weight))
            fh.write("\t".join(row) + "\n")


def load_nbest_corpus(path: str) -> list[NBestList]:
    """Load an N-best corpus TSV (``id rank score tokens``) into lists."""
    by_id: dict[str, list[NBestEntry]] = {}
    order: list[str] = []
    last_id: str | None = None
    with _open_for_reading(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            cols = _split_line(line, path, lineno, 4)
            utt_id = cols[0]
            try:
                rank = int(cols[1])
                score = float(cols[2])
            except ValueError:
                raise CorpusFormatError(
                    f"{path}:{lineno}: invalid rank/score "
                    f"({cols[1]!r}, {cols[2]!r})"
                ) from None
            if utt_id not in by_id:
                if utt_id in order:
                    raise CorpusFormatError(
                        f"{path}:{lineno}: entries for id {utt_id!r} are not "
                        f"contiguous"
                    )
                by_id[utt_id] = []
                order.append(utt_id)
            elif utt_id != last_id:
                raise CorpusFormatError(
                    f"{path}:{lineno}: entries for id {utt_id!r} are not "
                    f"contiguous"
                )
            try:
                by_id[utt_id].append(
                    NBestEntry(rank=rank, score=score, tokens=normalize_text(cols[3]))
                )
            except CorpusFormatError as exc:
                raise CorpusFormatError(f"{path}:{lineno}: {exc}") from None
            last_id = utt_id
    lists = []
    for utt_id in order:
        try:
            lists.append(NBestList(id=utt_id, entries=tuple(by_id[utt_id])))
        except CorpusFormatError as exc:
            raise CorpusFormatError(f"{path}: {exc}") from None
    return lists


def write_nbest_corpus(lists: list[NBestList], path: str) -> None:
    """Write an N-best corpus TSV in canonical (byte round-trip) form."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for nbest in lists:
            for entry in nbest.entries:
                fh.write(
                    f"{nbest.id}\t{entry.rank}\t{repr(entry.score)}\t"
                    f"{' '.join(entry.tokens)}\n"
                )


def load_transcripts(path: str) -> list[Utterance]:
    """Load a 2-column transcript TSV; the text column may be empty."""
    utts: list[Utterance] = []
    seen: set[str] = set()
    with _open_for_reading(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            cols = _split_line(line, path, lineno, 2)
            utt_id = cols[0]
            if utt_id in seen:
                raise CorpusFormatError(
                    f"{path}:{lineno}: duplicate utterance id {utt_id!r}"
                )
            seen.add(utt_id)
            try:
                utts.append(Utterance(id=utt_id, tokens=normalize_text(cols[1])))
            except CorpusFormatError as exc:
                raise CorpusFormatError(f"{path}:{lineno}: {exc}") from None
    return utts


def write_transcripts(utts: list[Utterance], path: str) -> None:
    """Write a 2-column transcript TSV."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for utt in utts:
            fh.write(f"{utt.id}\t{' '.join(utt.tokens)}\n")


def expand_nbest_to_pairs(
    lists: list[NBestList],
    references: dict[str, tuple[str, ...]],
    n: int,
    weighting: str = "uniform",
) -> list[UtterancePair]:
    """Expand N-best lists into weighted training pairs against references.

    Takes the top ``n`` candidates of each list and pairs each with the
    reference for that id.  Under ``uniform`` weighting every candidate of
    a list gets weight ``1/k`` where ``k`` is the number of candidates
    actually taken, so each utterance contributes total weight 1.  Under
    ``rank`` weighting candidate ``r`` gets weight proportional to
    ``1/r``, normalized to sum to 1 per list.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if weighting not in ("uniform", "rank"):
        raise ValueError(f"unknown weighting {weighting!r}")
    pairs: list[UtterancePair] = []
    for nbest in lists:
        if nbest.id not in references:
            raise CorpusFormatError(
                f"n-best list {nbest.id!r} has no reference transcript"
            )
        reference = references[nbest.id]
        taken = nbest.entries[:n]
        if not taken:
            continue
        if weighting == "uniform":
            weights = [1.0 / len(taken)] * len(taken)
        else:
            raw = [1.0 / entry.rank for entry in taken]
            total = sum(raw)
            weights = [w / total for w in raw]
        for entry, weight in zip(taken, weights):
            pairs.append(
                UtterancePair(
                    id=f"{nbest.id}#{entry.rank}",
                    hypothesis=entry.tokens,
                    reference=reference,
                    weight=weight,
                )
            )
    return pairs
