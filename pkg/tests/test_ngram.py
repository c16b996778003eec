"""Counting, discount estimation, Kneser-Ney smoothing, and model i/o.

The smoothed probabilities are checked against an independent recursive
scorer that recomputes adjusted counts, discounts, and the interpolated
distribution directly from raw counts, plus per-context normalization sums
over the whole vocabulary.
"""

from __future__ import annotations

import math
import random

import pytest

from t2tmap import (
    AlignedUtterance,
    CorpusFormatError,
    Discounts,
    EstimationError,
    JointNGramModel,
    NGramCounts,
    PairSymbol,
    count_ngrams,
    estimate_discounts,
    estimate_modified_kneser_ney,
    load_model,
    perplexity,
    write_model,
)
from t2tmap.ngram import BOS, EOS

A = PairSymbol(("a",), ("a",))
B = PairSymbol(("b",), ("b",))
C = PairSymbol(("c",), ("c",))


def sym(ch: str) -> PairSymbol:
    return PairSymbol((ch,), (ch,))


def utt(symbols, weight=1.0, uid="u"):
    return AlignedUtterance(id=uid, symbols=tuple(symbols), weight=weight)


# ---------------------------------------------------------------------------
# independent oracles


def naive_counts(alignments, order):
    """Literal re-statement of the counting rule."""
    levels = [dict() for _ in range(order)]
    for a in alignments:
        seq = (BOS,) * (order - 1) + a.symbols + (EOS,)
        for t in range(order - 1, len(seq)):
            for k in range(1, order + 1):
                gram = seq[t - k + 1 : t + 1]
                levels[k - 1][gram] = levels[k - 1].get(gram, 0.0) + a.weight
    return levels


def oracle_adjusted(raw_levels, order):
    """Adjusted counts: raw at the top, continuation types below, except
    begin-sentinel-initial grams which keep raw counts."""
    out = []
    for level in range(1, order + 1):
        raw = raw_levels[level - 1]
        if level == order:
            out.append(dict(raw))
            continue
        grams = {}
        for gram, count in raw.items():
            if gram[0] == BOS:
                grams[gram] = count
            else:
                grams[gram] = float(
                    sum(1 for g in raw_levels[level] if g[1:] == gram)
                )
        out.append(grams)
    return out


def oracle_prob(gram, adjusted, discounts, uniform):
    """Recursive interpolated modified-KN probability of ``gram``."""
    level = len(gram)
    counts = adjusted[level - 1]
    ctx = gram[:-1]
    group = [c for g, c in counts.items() if g[:-1] == ctx]
    total = math.fsum(group)
    count = counts.get(gram, 0.0)
    removed = math.fsum(min(discounts.discount(level, c), c) for c in group)
    gamma = removed / total
    if level == 1:
        lower = uniform
    else:
        lower = oracle_prob(gram[1:], adjusted, discounts, uniform)
    return (count - min(discounts.discount(level, count), count)) / total + (
        gamma * lower
    )


def model_prob(model, gram):
    lp10 = model.gram_logprob10(gram[:-1], gram[-1])
    assert lp10 is not None
    return 10.0**lp10


def stored_contexts(model):
    ctxs = {()}
    ctxs.update(model.backoffs)
    return ctxs


def assert_normalized(model, tol=1e-9):
    symbols = list(model.vocabulary) + [EOS]
    for ctx in stored_contexts(model):
        total = math.fsum(model_prob(model, ctx + (s,)) for s in symbols)
        assert total == pytest.approx(1.0, abs=tol), f"context {ctx!r}"


def random_corpus(seed, n_utts=30, vocab="abcd", max_len=6):
    rng = random.Random(seed)
    return [
        utt(
            [sym(rng.choice(vocab)) for _ in range(rng.randint(1, max_len))],
            weight=rng.choice([0.5, 1.0, 1.0, 2.0]),
            uid=f"u{i}",
        )
        for i in range(n_utts)
    ]


# ---------------------------------------------------------------------------
# counting


def test_count_single_symbol_utterance_order2():
    counts = count_ngrams([utt([A])], order=2)
    assert counts.levels[0] == {(A,): 1.0, (EOS,): 1.0}
    assert counts.levels[1] == {(BOS, A): 1.0, (A, EOS): 1.0}


def test_count_respects_weights():
    counts = count_ngrams([utt([A], weight=0.5)], order=2)
    assert counts.levels[0] == {(A,): 0.5, (EOS,): 0.5}


def test_count_order_one_has_no_padding_grams():
    counts = count_ngrams([utt([A, B])], order=1)
    assert counts.levels[0] == {(A,): 1.0, (B,): 1.0, (EOS,): 1.0}


@pytest.mark.parametrize("order", [1, 2, 3, 5])
def test_count_matches_naive_counter(order):
    corpus = random_corpus(seed=100 + order)
    got = count_ngrams(corpus, order)
    want = naive_counts(corpus, order)
    assert got.order == order
    assert len(got.levels) == order
    for level in range(order):
        assert set(got.levels[level]) == set(want[level])
        for gram, value in want[level].items():
            assert got.levels[level][gram] == pytest.approx(value, rel=1e-12)


def test_count_rejects_bad_order():
    with pytest.raises(ValueError):
        count_ngrams([utt([A])], order=0)
    with pytest.raises(ValueError):
        count_ngrams([utt([A])], order=10)


# ---------------------------------------------------------------------------
# discounts


def test_discounts_frozen_counts_of_counts():
    # counts {1, 1, 2, 3, 4} give n1..n4 = (2, 1, 1, 1):
    #   Y = 2/(2+2) = 0.5
    #   D1 = 1 - 2*0.5*(1/2) = 0.5, D2 = 2 - 3*0.5 = 0.5, D3+ = 3 - 4*0.5 = 1.0
    adjusted = [
        {("a",): 1.0, ("b",): 1.0, ("c",): 2.0, ("d",): 3.0, ("e",): 4.0}
    ]
    got = estimate_discounts(adjusted).by_level[0]
    assert got == pytest.approx((0.5, 0.5, 1.0), abs=1e-12)


def test_discounts_fallback_on_sparse_counts(caplog):
    with caplog.at_level("WARNING"):
        got = estimate_discounts([{("a",): 1.0, ("b",): 1.0}]).by_level[0]
    assert got == (0.5, 0.5, 0.5)
    assert "sparse" in caplog.text


def test_discounts_clamped_to_smallest_unrounded_count():
    # The 0.2 count lands in the <=1 bucket, so D1 is capped at 0.99 * 0.2.
    adjusted = [
        {("a",): 0.2, ("b",): 1.0, ("c",): 2.0, ("d",): 3.0, ("e",): 4.0}
    ]
    got = estimate_discounts(adjusted).by_level[0]
    assert got[0] == pytest.approx(0.99 * 0.2, abs=1e-12)


def test_discount_bucketing_rounds_half_up():
    d = Discounts(by_level=((1.0, 2.0, 3.0),))
    assert d.discount(1, 0.4) == 1.0
    assert d.discount(1, 1.0) == 1.0
    assert d.discount(1, 1.4) == 1.0
    assert d.discount(1, 1.5) == 2.0  # half-up, not banker's rounding
    assert d.discount(1, 2.4) == 2.0
    assert d.discount(1, 2.5) == 3.0
    assert d.discount(1, 7.0) == 3.0


# ---------------------------------------------------------------------------
# estimation: frozen hand cases


def test_unigram_model_hand_computed():
    # counts {a: 3, b: 1} with explicit D = 0.5 everywhere:
    #   gamma = (0.5 + 0.5) / 4 = 0.25, uniform base = 1/2
    #   p(a) = 2.5/4 + 0.25/2 = 0.75,  p(b) = 0.5/4 + 0.25/2 = 0.25
    counts = NGramCounts(order=1, levels=[{(A,): 3.0, (B,): 1.0}])
    model = estimate_modified_kneser_ney(
        counts, discounts=Discounts(by_level=((0.5, 0.5, 0.5),))
    )
    assert model_prob(model, (A,)) == pytest.approx(0.75, abs=1e-12)
    assert model_prob(model, (B,)) == pytest.approx(0.25, abs=1e-12)
    assert model.backoffs == {}
    assert model.vocabulary == frozenset({A, B})


def test_bigram_model_hand_computed():
    # One training utterance [a]. All discounts fall back to 0.5.
    #   p(a) = p(</s>) = 0.5
    #   p(a | <s>) = 0.5/1 + 0.5 * 0.5 = 0.75 = p(</s> | a)
    model = estimate_modified_kneser_ney(count_ngrams([utt([A])], order=2))
    assert model_prob(model, (A,)) == pytest.approx(0.5, abs=1e-12)
    assert model_prob(model, (EOS,)) == pytest.approx(0.5, abs=1e-12)
    assert model_prob(model, (BOS, A)) == pytest.approx(0.75, abs=1e-12)
    assert model_prob(model, (A, EOS)) == pytest.approx(0.75, abs=1e-12)
    assert 10.0 ** model.backoffs[(BOS,)] == pytest.approx(0.5, abs=1e-12)
    assert 10.0 ** model.backoffs[(A,)] == pytest.approx(0.5, abs=1e-12)
    assert (BOS,) not in model.logprobs


def test_estimation_rejects_empty_counts():
    with pytest.raises(EstimationError):
        estimate_modified_kneser_ney(NGramCounts(order=1, levels=[{}]))


# ---------------------------------------------------------------------------
# estimation: oracle comparison and normalization on random corpora


@pytest.mark.parametrize("order,seed", [(1, 1), (2, 2), (3, 3), (4, 4)])
def test_stored_probabilities_match_recursive_oracle(order, seed):
    corpus = random_corpus(seed, n_utts=25)
    counts = count_ngrams(corpus, order)
    model = estimate_modified_kneser_ney(counts)
    adjusted = oracle_adjusted(counts.levels, order)
    discounts = estimate_discounts(adjusted)
    uniform = 1.0 / len(adjusted[0])
    checked = 0
    for gram in model.logprobs:
        want = oracle_prob(gram, adjusted, discounts, uniform)
        assert model_prob(model, gram) == pytest.approx(
            want, rel=1e-9, abs=1e-12
        ), f"gram {gram!r}"
        checked += 1
    assert checked == len(model.logprobs) > 0


@pytest.mark.parametrize("order,seed", [(1, 11), (2, 12), (3, 13), (5, 14)])
def test_model_normalizes_over_every_stored_context(order, seed):
    corpus = random_corpus(seed, n_utts=20, vocab="abc")
    model = estimate_modified_kneser_ney(count_ngrams(corpus, order))
    assert_normalized(model)


def test_all_stored_probabilities_are_valid():
    model = estimate_modified_kneser_ney(
        count_ngrams(random_corpus(77), order=3)
    )
    for gram, lp10 in model.logprobs.items():
        p = 10.0**lp10
        assert 0.0 < p <= 1.0, f"gram {gram!r} has probability {p}"
    for ctx, bo10 in model.backoffs.items():
        assert bo10 <= 0.0 or 10.0**bo10 <= 1.0 + 1e-9


# ---------------------------------------------------------------------------
# scoring


def test_gram_logprob_backs_off_through_missing_contexts():
    model = estimate_modified_kneser_ney(count_ngrams([utt([A])], order=2))
    # (b, a) is unseen: p = backoff(b) * p(a); backoff of an unknown context
    # is free (weight 1).
    direct = model.gram_logprob10((B,), A)
    assert direct == pytest.approx(model.gram_logprob10((), A), abs=1e-12)
    # (<s>, </s>) is unseen: p = backoff(<s>) * p(</s>) = 0.5 * 0.5.
    assert 10.0 ** model.gram_logprob10((BOS,), EOS) == pytest.approx(
        0.25, abs=1e-12
    )


def test_gram_logprob_returns_none_for_unknown_unigram():
    model = estimate_modified_kneser_ney(count_ngrams([utt([A])], order=2))
    assert model.gram_logprob10((), C) is None
    assert model.gram_logprob10((A,), C) is None


def test_advance_context_keeps_longest_stored_suffix():
    model = estimate_modified_kneser_ney(
        count_ngrams([utt([A, B]), utt([B, A], uid="u2")], order=3)
    )
    assert model.advance_context((BOS, BOS), A) == (BOS, A)
    # (c,) is not stored anywhere, so the context collapses to empty.
    assert model.advance_context((A,), C) == ()
    # order-1 models always use the empty context.
    uni = estimate_modified_kneser_ney(count_ngrams([utt([A])], order=1))
    assert uni.advance_context((), A) == ()


def test_sequence_logprob_hand_computed():
    model = estimate_modified_kneser_ney(count_ngrams([utt([A])], order=2))
    # ln p(a | <s>) + ln p(</s> | a) = ln(0.75) + ln(0.75)
    assert model.sequence_logprob((A,)) == pytest.approx(
        2 * math.log(0.75), abs=1e-12
    )


def test_sequence_logprob_scores_oov_at_fixed_cost():
    model = estimate_modified_kneser_ney(count_ngrams([utt([A])], order=2))
    # OOV term is -20 nats; the context then collapses to () so the end
    # transition scores the unigram p(</s>) = 0.5.
    assert model.sequence_logprob((C,)) == pytest.approx(
        -20.0 + math.log(0.5), abs=1e-12
    )


def test_perplexity_hand_computed_and_validation():
    model = estimate_modified_kneser_ney(count_ngrams([utt([A])], order=2))
    # exp(-(2 ln 0.75) / 2) = 4/3
    assert perplexity(model, [utt([A])]) == pytest.approx(4.0 / 3.0, rel=1e-12)
    with pytest.raises(ValueError):
        perplexity(model, [])


def test_perplexity_is_weight_invariant_on_uniform_scaling():
    corpus = random_corpus(5)
    model = estimate_modified_kneser_ney(count_ngrams(corpus, 2))
    scaled = [
        AlignedUtterance(id=a.id, symbols=a.symbols, weight=a.weight * 3.0)
        for a in corpus
    ]
    assert perplexity(model, corpus) == pytest.approx(
        perplexity(model, scaled), rel=1e-12
    )


# ---------------------------------------------------------------------------
# serialization


def test_write_model_exact_bytes(tmp_path):
    model = estimate_modified_kneser_ney(count_ngrams([utt([A])], order=2))
    path = tmp_path / "model.tsv"
    write_model(model, str(path))
    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "\\t2tmap-jointlm order=2\\"
    assert lines[1] == "\\1-grams:"
    lp_unigram = "%.17g" % math.log10(0.5)
    lp_bigram = "%.17g" % math.log10(0.75)
    bo = "%.17g" % math.log10(0.5)
    assert lines[2] == f"{lp_unigram}\t</s>"
    assert lines[3] == f"-99\t<s>\t{bo}"  # context-only placeholder row
    assert lines[4] == f"{lp_unigram}\ta}}a\t{bo}"
    assert lines[5] == "\\2-grams:"
    assert lines[6] == f"{lp_bigram}\t<s> a}}a"
    assert lines[7] == f"{lp_bigram}\ta}}a </s>"
    assert lines[8] == "\\end\\"
    assert len(lines) == 9


@pytest.mark.parametrize("order", [1, 2, 3, 5])
def test_model_round_trip_preserves_everything(tmp_path, order):
    model = estimate_modified_kneser_ney(
        count_ngrams(random_corpus(40 + order), order)
    )
    path = tmp_path / "model.tsv"
    write_model(model, str(path))
    loaded = load_model(str(path))
    assert loaded.order == model.order
    assert loaded.logprobs == model.logprobs
    assert loaded.backoffs == model.backoffs
    assert loaded.vocabulary == model.vocabulary


def test_model_write_load_write_is_byte_identical(tmp_path):
    model = estimate_modified_kneser_ney(
        count_ngrams(random_corpus(55), order=3)
    )
    first = tmp_path / "a.tsv"
    second = tmp_path / "b.tsv"
    write_model(model, str(first))
    write_model(load_model(str(first)), str(second))
    assert first.read_bytes() == second.read_bytes()


def _valid_model_text():
    lp = "%.17g" % math.log10(0.5)
    bp = "%.17g" % math.log10(0.75)
    bo = "%.17g" % math.log10(0.5)
    return (
        "\\t2tmap-jointlm order=2\\\n"
        f"\\1-grams:\n{lp}\t</s>\n-99\t<s>\t{bo}\n{lp}\ta}}a\t{bo}\n"
        f"\\2-grams:\n{bp}\t<s> a}}a\n{bp}\ta}}a </s>\n\\end\\\n"
    )


@pytest.mark.parametrize(
    "mutate,match",
    [
        (lambda t: t.replace("\\t2tmap-jointlm order=2\\", "arpa 2"), "header"),
        (lambda t: t.replace("order=2", "order=0"), "order"),
        (lambda t: t.replace("\\end\\\n", ""), "end marker"),
        (lambda t: t.replace("\\1-grams:\n", ""), "section"),
        (lambda t: t.replace("\\2-grams:", "\\3-grams:"), "expected section 2"),
        (lambda t: t + "extra\tline\n", "after end marker"),
        (lambda t: t.replace("-99\t<s>", "0.0\t<s>"), "placeholder"),
        (
            lambda t: t.replace("\ta}}a </s>\n".format(), "\ta}a </s>\t-0.5\n"),
            "top-level",
        ),
        (lambda t: t.replace("<s> a}a", "<s> a}a a}a"), "length"),
        (lambda t: t.replace("a}a </s>", "a}a <s>"), "placeholder|backoff"),
    ],
)
def test_load_model_rejects_malformed(tmp_path, mutate, match):
    path = tmp_path / "model.tsv"
    path.write_text(mutate(_valid_model_text()), encoding="utf-8")
    with pytest.raises(CorpusFormatError, match=match):
        load_model(str(path))


def test_load_model_rejects_duplicate_gram(tmp_path):
    text = _valid_model_text()
    lp = "%.17g" % math.log10(0.5)
    text = text.replace(f"{lp}\t</s>\n", f"{lp}\t</s>\n{lp}\t</s>\n")
    path = tmp_path / "model.tsv"
    path.write_text(text, encoding="utf-8")
    with pytest.raises(CorpusFormatError, match="duplicate"):
        load_model(str(path))


def test_loaded_model_scores_like_original(tmp_path):
    corpus = random_corpus(60)
    model = estimate_modified_kneser_ney(count_ngrams(corpus, 3))
    path = tmp_path / "model.tsv"
    write_model(model, str(path))
    loaded = load_model(str(path))
    for a in corpus[:5]:
        assert loaded.sequence_logprob(a.symbols) == model.sequence_logprob(
            a.symbols
        )
