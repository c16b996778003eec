"""Synthetic noisy-channel corpus generation.

Clean reference transcripts are corrupted with leftmost-longest phrase
rules plus random single-word deletions to produce paired training data
and ranked N-best lists.  Lower ranks corrupt more conservatively: both
rule and deletion probabilities are scaled by ``exp(-temperature * (rank
- 1))``.  Every utterance draws from its own deterministic random stream
derived from the corpus seed, so output is reproducible and independent
of utterance order within a run.
"""

from __future__ import annotations

import logging
import math
import random
from dataclasses import dataclass
from functools import lru_cache

from .corpus import (
    NBestEntry,
    NBestList,
    Utterance,
    UtterancePair,
    normalize_text,
)
from .errors import CorpusFormatError

logger = logging.getLogger(__name__)

EPS_TOKEN = "<eps>"

_MAX_SPAN = 3
_MAX_REDRAWS = 4
_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class CorruptionRule:
    """Replace ``match`` (1-3 tokens) with ``replacement`` (0-3 tokens)
    with the given probability when the match is found."""

    match: tuple[str, ...]
    replacement: tuple[str, ...]
    probability: float

    def __post_init__(self) -> None:
        if not 1 <= len(self.match) <= _MAX_SPAN:
            raise CorpusFormatError(
                f"rule match must have 1..{_MAX_SPAN} tokens, "
                f"got {self.match!r}"
            )
        if len(self.replacement) > _MAX_SPAN:
            raise CorpusFormatError(
                f"rule replacement must have at most {_MAX_SPAN} tokens, "
                f"got {self.replacement!r}"
            )
        if not 0.0 < self.probability <= 1.0:
            raise CorpusFormatError(
                f"rule probability must be in (0, 1], got {self.probability!r}"
            )


@dataclass(frozen=True)
class CorruptionModel:
    """A rule set plus global word-deletion noise and the corpus seed."""

    rules: tuple[CorruptionRule, ...]
    word_deletion_prob: float = 0.05
    seed: int = 0

    def __post_init__(self) -> None:
        if not 0.0 <= self.word_deletion_prob < 1.0:
            raise CorpusFormatError(
                f"word_deletion_prob must be in [0, 1), "
                f"got {self.word_deletion_prob!r}"
            )

    def rules_by_span(self) -> dict[int, dict[tuple[str, ...], CorruptionRule]]:
        """First-listed rule per match phrase, grouped by span length."""
        return _rules_by_span(self.rules)


@lru_cache(maxsize=16)
def _rules_by_span(
    rules: tuple[CorruptionRule, ...],
) -> dict[int, dict[tuple[str, ...], CorruptionRule]]:
    by_span: dict[int, dict[tuple[str, ...], CorruptionRule]] = {}
    for rule in rules:
        span = by_span.setdefault(len(rule.match), {})
        span.setdefault(rule.match, rule)
    return by_span


@dataclass(frozen=True)
class SynthConfig:
    """N-best list size and rank-decay temperature."""

    nbest_size: int = 25
    alternative_temperature: float = 0.1

    def __post_init__(self) -> None:
        if self.nbest_size < 1:
            raise ValueError(
                f"nbest_size must be >= 1, got {self.nbest_size}"
            )
        if self.alternative_temperature < 0:
            raise ValueError(
                f"alternative_temperature must be >= 0, "
                f"got {self.alternative_temperature!r}"
            )


def load_rules(path: str) -> tuple[CorruptionRule, ...]:
    """Load ``match<TAB>replacement<TAB>probability`` rows; ``<eps>`` as
    the replacement means deletion of the matched phrase."""
    rules: list[CorruptionRule] = []
    try:
        fh = open(path, encoding="utf-8")
    except OSError as exc:
        raise CorpusFormatError(f"cannot read rules file: {exc}") from None
    with fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            cols = line.split("\t")
            if len(cols) != 3:
                raise CorpusFormatError(
                    f"{path}:{lineno}: expected 3 tab-separated columns, "
                    f"got {len(cols)}"
                )
            try:
                probability = float(cols[2])
            except ValueError:
                raise CorpusFormatError(
                    f"{path}:{lineno}: invalid probability {cols[2]!r}"
                ) from None
            replacement = (
                () if cols[1] == EPS_TOKEN else normalize_text(cols[1])
            )
            try:
                rules.append(
                    CorruptionRule(
                        match=normalize_text(cols[0]),
                        replacement=replacement,
                        probability=probability,
                    )
                )
            except CorpusFormatError as exc:
                raise CorpusFormatError(f"{path}:{lineno}: {exc}") from None
    return tuple(rules)


def _derive_seed(seed: int, index: int) -> int:
    """Mix (seed, index) into an independent 64-bit stream seed."""
    z = (seed + (index + 1) * 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def corrupt_utterance(
    tokens: tuple[str, ...],
    model: CorruptionModel,
    rng: random.Random,
    scale: float = 1.0,
) -> tuple[str, ...]:
    """Corrupt one token sequence with leftmost-longest rule application.

    At each position the longest matching rule (first-listed on span ties)
    gets one firing draw at ``probability * scale``; if it fires, the
    replacement is emitted and the match is consumed.  Otherwise the single
    current token faces one deletion draw at ``word_deletion_prob * scale``
    before being copied through.
    """
    by_span = model.rules_by_span()
    deletion_prob = model.word_deletion_prob * scale
    out: list[str] = []
    i = 0
    while i < len(tokens):
        rule = None
        for span in range(_MAX_SPAN, 0, -1):
            span_rules = by_span.get(span)
            if span_rules and i + span <= len(tokens):
                rule = span_rules.get(tokens[i : i + span])
                if rule is not None:
                    break
        if rule is not None and rng.random() < rule.probability * scale:
            out.extend(rule.replacement)
            i += len(rule.match)
            continue
        if rng.random() < deletion_prob:
            i += 1
            continue
        out.append(tokens[i])
        i += 1
    return tuple(out)


def generate_corpus(
    references: list[Utterance],
    model: CorruptionModel,
    config: SynthConfig | None = None,
) -> tuple[list[UtterancePair], list[NBestList]]:
    """Produce (paired corpus, N-best lists) for clean reference transcripts.

    The rank-1 candidate of each list is exactly the paired hypothesis.
    Duplicate candidates within a list are redrawn up to four times and
    then dropped, so lists may be shorter than ``nbest_size``; surviving
    candidates are re-ranked contiguously with scores ``rank / 10``.
    """
    config = config or SynthConfig()
    pairs: list[UtterancePair] = []
    nbest: list[NBestList] = []
    for index, utt in enumerate(references):
        if not utt.tokens:
            raise CorpusFormatError(
                f"utterance {utt.id!r}: cannot corrupt an empty reference"
            )
        rng = random.Random(_derive_seed(model.seed, index))
        candidates: list[tuple[str, ...]] = []
        seen: set[tuple[str, ...]] = set()
        for rank in range(1, config.nbest_size + 1):
            scale = math.exp(-config.alternative_temperature * (rank - 1))
            candidate = corrupt_utterance(utt.tokens, model, rng, scale)
            redraws = 0
            while candidate in seen and redraws < _MAX_REDRAWS:
                candidate = corrupt_utterance(utt.tokens, model, rng, scale)
                redraws += 1
            if candidate in seen:
                continue
            seen.add(candidate)
            candidates.append(candidate)
        pairs.append(
            UtterancePair(
                id=utt.id, hypothesis=candidates[0], reference=utt.tokens
            )
        )
        nbest.append(
            NBestList(
                id=utt.id,
                entries=tuple(
                    NBestEntry(rank=rank, score=rank / 10, tokens=tokens)
                    for rank, tokens in enumerate(candidates, start=1)
                ),
            )
        )
    return pairs, nbest
