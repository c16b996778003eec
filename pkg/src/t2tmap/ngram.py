"""Joint n-gram language model over pair symbols with Kneser-Ney smoothing.

Counts are collected over aligned pair-symbol sequences padded with
sentence-boundary sentinels, then smoothed with interpolated modified
Kneser-Ney using three count-dependent discounts per level.  Counts may be
fractional (weighted corpora); lower-level numerators use continuation
(type) counts except for sentinel-initial grams, which keep raw counts.

Probabilities and backoff weights are stored and serialized in base-10
logarithms so that a write/load cycle is byte-identical; natural-log
values are produced at the call sites that need them.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

from .alignment import AlignedUtterance, PairSymbol, parse_symbol, render_symbol
from .errors import CorpusFormatError, EstimationError

logger = logging.getLogger(__name__)

BOS = "<s>"
EOS = "</s>"
LN10 = math.log(10.0)

#: Natural-log probability assigned to symbols outside the vocabulary.
OOV_LOGPROB = -20.0

#: Literal log-probability field for context-only entries (grams ending in
#: the begin sentinel, which are never predicted but carry backoff weight).
PLACEHOLDER = "-99"

_MAX_ORDER = 9

Gram = tuple  # tuple of PairSymbol and/or sentinel strings


def _validate_order(order: int) -> None:
    if not 1 <= order <= _MAX_ORDER:
        raise ValueError(f"order must be in 1..{_MAX_ORDER}, got {order}")


def _sym_sort_key(sym) -> tuple:
    if isinstance(sym, str):
        return (0, sym, (), ())
    return (1, "", sym.source, sym.target)


def _gram_sort_key(gram: Gram) -> tuple:
    return tuple(_sym_sort_key(sym) for sym in gram)


@dataclass
class NGramCounts:
    """Weighted raw n-gram counts, one dict per level (1-based)."""

    order: int
    levels: list[dict[Gram, float]]


def count_ngrams(alignments: list[AlignedUtterance], order: int) -> NGramCounts:
    """Count all 1..order grams over sentinel-padded symbol sequences.

    Each utterance is padded with ``order - 1`` begin sentinels and one end
    sentinel; every gram ending at a non-begin position is counted with the
    utterance weight.
    """
    _validate_order(order)
    levels: list[dict[Gram, float]] = [{} for _ in range(order)]
    for utt in alignments:
        seq = (BOS,) * (order - 1) + utt.symbols + (EOS,)
        weight = utt.weight
        for t in range(order - 1, len(seq)):
            for k in range(1, order + 1):
                gram = seq[t - k + 1 : t + 1]
                level = levels[k - 1]
                level[gram] = level.get(gram, 0.0) + weight
    return NGramCounts(order=order, levels=levels)


def _adjusted_counts(counts: NGramCounts) -> list[dict[Gram, float]]:
    """Counts used for estimation: raw at the top level, continuation
    (distinct-extension type) counts below, except begin-sentinel-initial
    grams which keep raw counts."""
    adjusted: list[dict[Gram, float]] = []
    for level in range(1, counts.order + 1):
        raw = counts.levels[level - 1]
        if level == counts.order:
            adjusted.append(dict(raw))
            continue
        continuations: dict[Gram, int] = {}
        for gram in counts.levels[level]:
            suffix = gram[1:]
            continuations[suffix] = continuations.get(suffix, 0) + 1
        out: dict[Gram, float] = {}
        for gram, count in raw.items():
            if gram[0] == BOS:
                out[gram] = count
            else:
                cont = continuations.get(gram)
                if cont is None:
                    raise EstimationError(
                        f"gram {gram!r} at level {level} has no counted "
                        f"extension; counts are inconsistent"
                    )
                out[gram] = float(cont)
        adjusted.append(out)
    return adjusted


@dataclass(frozen=True)
class Discounts:
    """Per-level (D1, D2, D3+) discounts bucketed by rounded count."""

    by_level: tuple[tuple[float, float, float], ...]

    def discount(self, level: int, count: float) -> float:
        d1, d2, d3plus = self.by_level[level - 1]
        rounded = int(count + 0.5)
        if rounded <= 1:
            return d1
        if rounded == 2:
            return d2
        return d3plus


def estimate_discounts(adjusted: list[dict[Gram, float]]) -> Discounts:
    """Estimate (D1, D2, D3+) per level from counts-of-counts.

    Rounding is half-up so fractional counts bucket predictably.  If any of
    n1..n4 is zero at a level, that level falls back to 0.5 for all three
    discounts.  Every discount is clamped into [0, 0.99 * m] where m is the
    smallest unrounded count in its bucket, which keeps every discounted
    numerator positive.
    """
    by_level: list[tuple[float, float, float]] = []
    for level, level_counts in enumerate(adjusted, start=1):
        n = [0] * 5
        min_count = [math.inf, math.inf, math.inf]  # buckets: <=1, ==2, >=3
        for count in level_counts.values():
            rounded = int(count + 0.5)
            if 1 <= rounded <= 4:
                n[rounded] += 1
            bucket = 0 if rounded <= 1 else (1 if rounded == 2 else 2)
            min_count[bucket] = min(min_count[bucket], count)
        if 0 in n[1:]:
            logger.warning(
                "level %d: sparse counts-of-counts (n1..n4 = %s); "
                "falling back to 0.5 discounts",
                level,
                n[1:],
            )
            discounts = [0.5, 0.5, 0.5]
        else:
            y = n[1] / (n[1] + 2.0 * n[2])
            discounts = [
                1.0 - 2.0 * y * n[2] / n[1],
                2.0 - 3.0 * y * n[3] / n[2],
                3.0 - 4.0 * y * n[4] / n[3],
            ]
        clamped = []
        for bucket, value in enumerate(discounts):
            if math.isfinite(min_count[bucket]):
                value = min(value, 0.99 * min_count[bucket])
            clamped.append(max(value, 0.0))
        by_level.append(tuple(clamped))
    return Discounts(by_level=tuple(by_level))


@dataclass
class JointNGramModel:
    """Smoothed joint n-gram model in ARPA-like backoff form.

    ``logprobs`` maps grams to base-10 log probabilities; ``backoffs`` maps
    context grams to base-10 log backoff weights.  Context-only grams
    (ending in the begin sentinel) appear in ``backoffs`` but never in
    ``logprobs``.
    """

    order: int
    logprobs: dict[Gram, float]
    backoffs: dict[Gram, float]
    vocabulary: frozenset = field(default_factory=frozenset)

    def gram_logprob10(self, context: Gram, symbol) -> float | None:
        """Base-10 log p(symbol | context) via the backoff chain.

        Returns None for symbols with no unigram entry (out of vocabulary).
        """
        gram = (context + (symbol,))[-self.order :]
        penalty = 0.0
        while gram not in self.logprobs:
            if len(gram) == 1:
                return None
            penalty += self.backoffs.get(gram[:-1], 0.0)
            gram = gram[1:]
        return penalty + self.logprobs[gram]

    def advance_context(self, context: Gram, symbol) -> Gram:
        """Longest stored suffix of context + symbol, capped at order - 1."""
        if self.order == 1:
            return ()
        gram = (context + (symbol,))[-(self.order - 1) :]
        while gram and gram not in self.logprobs and gram not in self.backoffs:
            gram = gram[1:]
        return gram

    def sequence_logprob(self, symbols) -> float:
        """Natural-log probability of a symbol sequence including the end
        transition; out-of-vocabulary symbols score ``OOV_LOGPROB`` each."""
        context: Gram = (BOS,) * (self.order - 1)
        terms: list[float] = []
        for sym in tuple(symbols) + (EOS,):
            if sym != EOS and sym not in self.vocabulary:
                terms.append(OOV_LOGPROB)
            else:
                lp10 = self.gram_logprob10(context, sym)
                if lp10 is None:
                    terms.append(OOV_LOGPROB)
                else:
                    terms.append(lp10 * LN10)
            context = self.advance_context(context, sym)
        return math.fsum(terms)


def estimate_modified_kneser_ney(
    counts: NGramCounts, discounts: Discounts | None = None
) -> JointNGramModel:
    """Estimate an interpolated modified Kneser-Ney model from counts.

    Levels are estimated bottom-up; each level's distribution interpolates
    the discounted relative frequency with the next-lower distribution
    (uniform over the vocabulary-plus-end-sentinel at the unigram level).
    """
    if not counts.levels or not counts.levels[0]:
        raise EstimationError("cannot estimate a model from empty counts")
    adjusted = _adjusted_counts(counts)
    if discounts is None:
        discounts = estimate_discounts(adjusted)
    n_unigrams = len(adjusted[0])
    uniform = 1.0 / n_unigrams
    plinear: dict[Gram, float] = {}
    logprobs: dict[Gram, float] = {}
    backoffs: dict[Gram, float] = {}
    for level in range(1, counts.order + 1):
        groups: dict[Gram, list[tuple[object, float]]] = {}
        for gram, count in adjusted[level - 1].items():
            groups.setdefault(gram[:-1], []).append((gram[-1], count))
        for context, items in groups.items():
            total = math.fsum(count for _, count in items)
            if not total > 0.0:
                raise EstimationError(
                    f"context {context!r} has non-positive total count"
                )
            removed = math.fsum(
                min(discounts.discount(level, count), count)
                for _, count in items
            )
            gamma = removed / total
            for sym, count in items:
                if level == 1:
                    lower = uniform
                else:
                    lower = plinear[context[1:] + (sym,)]
                numerator = count - min(discounts.discount(level, count), count)
                p = numerator / total + gamma * lower
                # The exact value is <= 1; rounding may tip a near-certain
                # continuation a few ulps over.
                if math.isnan(p) or p <= 0.0 or p > 1.0 + 1e-9:
                    raise EstimationError(
                        f"invalid probability {p!r} for gram "
                        f"{context + (sym,)!r}"
                    )
                p = min(p, 1.0)
                plinear[context + (sym,)] = p
                logprobs[context + (sym,)] = math.log10(p)
            if context:
                backoffs[context] = (
                    math.log10(gamma) if gamma > 0.0 else -math.inf
                )
    vocabulary = frozenset(
        gram[0] for gram in counts.levels[0] if isinstance(gram[0], PairSymbol)
    )
    return JointNGramModel(
        order=counts.order,
        logprobs=logprobs,
        backoffs=backoffs,
        vocabulary=vocabulary,
    )


def perplexity(model: JointNGramModel, alignments: list[AlignedUtterance]) -> float:
    """Weighted per-symbol perplexity (end transitions included)."""
    if not alignments:
        raise ValueError("cannot compute perplexity of an empty corpus")
    log_total = math.fsum(
        utt.weight * model.sequence_logprob(utt.symbols) for utt in alignments
    )
    denominator = math.fsum(
        utt.weight * (len(utt.symbols) + 1) for utt in alignments
    )
    if not denominator > 0:
        raise ValueError("cannot compute perplexity over zero symbols")
    return math.exp(-log_total / denominator)


def _render_model_sym(sym) -> str:
    return sym if isinstance(sym, str) else render_symbol(sym)


def _parse_model_sym(text: str):
    if text in (BOS, EOS):
        return text
    return parse_symbol(text)


def _format_float(value: float) -> str:
    return "%.17g" % value


def write_model(model: JointNGramModel, path: str) -> None:
    """Serialize in an ARPA-like sectioned text format (canonical order)."""
    by_level: list[set[Gram]] = [set() for _ in range(model.order)]
    for gram in model.logprobs:
        by_level[len(gram) - 1].add(gram)
    for gram in model.backoffs:
        by_level[len(gram) - 1].add(gram)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"\\t2tmap-jointlm order={model.order}\\\n")
        for level in range(1, model.order + 1):
            fh.write(f"\\{level}-grams:\n")
            for gram in sorted(by_level[level - 1], key=_gram_sort_key):
                logprob = model.logprobs.get(gram)
                fields = [
                    PLACEHOLDER if logprob is None else _format_float(logprob),
                    " ".join(_render_model_sym(sym) for sym in gram),
                ]
                backoff = model.backoffs.get(gram)
                if backoff is not None:
                    fields.append(_format_float(backoff))
                fh.write("\t".join(fields) + "\n")
        fh.write("\\end\\\n")


def load_model(path: str) -> JointNGramModel:
    """Load a model written by :func:`write_model`."""

    def fail(lineno: int, message: str):
        raise CorpusFormatError(f"{path}:{lineno}: {message}")

    with open(path, encoding="utf-8") as fh:
        lines = fh.read().split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise CorpusFormatError(f"{path}:1: empty model file")
    header = lines[0]
    prefix, suffix = "\\t2tmap-jointlm order=", "\\"
    if not (header.startswith(prefix) and header.endswith(suffix)):
        fail(1, f"bad header {header!r}")
    try:
        order = int(header[len(prefix) : -len(suffix)])
    except ValueError:
        fail(1, f"bad header {header!r}")
    if not 1 <= order <= _MAX_ORDER:
        fail(1, f"order must be in 1..{_MAX_ORDER}, got {order}")
    logprobs: dict[Gram, float] = {}
    backoffs: dict[Gram, float] = {}
    level = 0
    ended = False
    for lineno, line in enumerate(lines[1:], start=2):
        if ended:
            fail(lineno, "content after end marker")
        if line == "\\end\\":
            ended = True
            continue
        if line.startswith("\\") and line.endswith("-grams:"):
            try:
                section = int(line[1:-7])
            except ValueError:
                fail(lineno, f"bad section header {line!r}")
            if section != level + 1:
                fail(lineno, f"expected section {level + 1}, got {section}")
            if section > order:
                fail(lineno, f"section {section} exceeds order {order}")
            level = section
            continue
        if level == 0:
            fail(lineno, "gram line before first section header")
        cols = line.split("\t")
        if len(cols) not in (2, 3):
            fail(lineno, f"expected 2 or 3 tab-separated columns, got {len(cols)}")
        try:
            gram = tuple(_parse_model_sym(tok) for tok in cols[1].split(" "))
        except ValueError as exc:
            fail(lineno, str(exc))
        if len(gram) != level:
            fail(lineno, f"gram length {len(gram)} in section {level}")
        if gram in logprobs or gram in backoffs:
            fail(lineno, f"duplicate gram {cols[1]!r}")
        if gram[-1] == BOS:
            if cols[0] != PLACEHOLDER:
                fail(
                    lineno,
                    f"context-only gram must use the {PLACEHOLDER!r} "
                    f"log-probability placeholder",
                )
            if len(cols) != 3:
                fail(lineno, "context-only gram must carry a backoff weight")
        else:
            try:
                logprobs[gram] = float(cols[0])
            except ValueError:
                fail(lineno, f"bad log-probability {cols[0]!r}")
        if len(cols) == 3:
            if level >= order:
                fail(lineno, "top-level gram must not carry a backoff weight")
            try:
                backoffs[gram] = float(cols[2])
            except ValueError:
                fail(lineno, f"bad backoff weight {cols[2]!r}")
    if not ended:
        raise CorpusFormatError(f"{path}: missing end marker")
    if level != order:
        raise CorpusFormatError(
            f"{path}: expected {order} gram sections, found {level}"
        )
    vocabulary = frozenset(
        gram[0]
        for gram in logprobs
        if len(gram) == 1 and isinstance(gram[0], PairSymbol)
    )
    return JointNGramModel(
        order=order, logprobs=logprobs, backoffs=backoffs, vocabulary=vocabulary
    )
