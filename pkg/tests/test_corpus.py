"""Text normalization, corpus containers, and TSV round-trips."""

from __future__ import annotations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from t2tmap import (
    CorpusFormatError,
    NBestEntry,
    NBestList,
    Utterance,
    UtterancePair,
    expand_nbest_to_pairs,
    load_nbest_corpus,
    load_paired_corpus,
    load_transcripts,
    normalize_text,
    write_nbest_corpus,
    write_paired_corpus,
    write_transcripts,
)

# ---------------------------------------------------------------------------
# normalize_text


def test_normalize_lowercases_and_splits():
    assert normalize_text("Accendi LA Luce") == ("accendi", "la", "luce")


def test_normalize_strips_punctuation():
    assert normalize_text('Che ore sono, adesso?! (dimmi) "tutto": ok;') == (
        "che",
        "ore",
        "sono",
        "adesso",
        "dimmi",
        "tutto",
        "ok",
    )


def test_normalize_applies_nfc():
    # "sì" (combining grave) and "sì" (precomposed) must normalize
    # to the same token.
    assert normalize_text("sì") == normalize_text("sì") == ("sì",)


def test_normalize_keeps_apostrophes_and_hyphens():
    assert normalize_text("l'ora sci-fi") == ("l'ora", "sci-fi")


def test_normalize_empty_and_whitespace():
    assert normalize_text("") == ()
    assert normalize_text("   \t  ") == ()


@pytest.mark.parametrize("tok", ["<eps>", "<s>", "</s>", "<unk>"])
def test_normalize_rejects_reserved_tokens(tok):
    with pytest.raises(CorpusFormatError):
        normalize_text(f"ciao {tok} mondo")


def test_normalize_is_idempotent():
    once = normalize_text("Metti La Musica, per favore!")
    assert normalize_text(" ".join(once)) == once


# ---------------------------------------------------------------------------
# container validation


def test_pair_rejects_empty_reference():
    with pytest.raises(CorpusFormatError, match="reference"):
        UtterancePair(id="u1", hypothesis=("a",), reference=())


def test_pair_allows_empty_hypothesis():
    pair = UtterancePair(id="u1", hypothesis=(), reference=("a",))
    assert pair.hypothesis == ()


@pytest.mark.parametrize("weight", [0.0, -1.0])
def test_pair_rejects_nonpositive_weight(weight):
    with pytest.raises(CorpusFormatError, match="weight"):
        UtterancePair(id="u1", hypothesis=("a",), reference=("b",), weight=weight)


def test_nbest_rejects_noncontiguous_ranks():
    with pytest.raises(CorpusFormatError, match="contiguous"):
        NBestList(
            id="u1",
            entries=(
                NBestEntry(rank=1, score=0.1, tokens=("a",)),
                NBestEntry(rank=3, score=0.2, tokens=("b",)),
            ),
        )


def test_nbest_rejects_decreasing_scores():
    with pytest.raises(CorpusFormatError, match="non-decreasing"):
        NBestList(
            id="u1",
            entries=(
                NBestEntry(rank=1, score=0.5, tokens=("a",)),
                NBestEntry(rank=2, score=0.1, tokens=("b",)),
            ),
        )


# ---------------------------------------------------------------------------
# paired corpus i/o


def test_paired_corpus_round_trip(tmp_path):
    pairs = [
        UtterancePair(id="u1", hypothesis=("a", "b"), reference=("c",)),
        UtterancePair(id="u2", hypothesis=(), reference=("d", "e"), weight=0.25),
    ]
    path = tmp_path / "pairs.tsv"
    write_paired_corpus(pairs, str(path))
    assert load_paired_corpus(str(path)) == pairs


def test_paired_corpus_weight_column_only_when_needed(tmp_path):
    path = tmp_path / "pairs.tsv"
    write_paired_corpus(
        [
            UtterancePair(id="u1", hypothesis=("a",), reference=("b",)),
            UtterancePair(id="u2", hypothesis=("a",), reference=("b",), weight=0.5),
        ],
        str(path),
    )
    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines[0].count("\t") == 2
    assert lines[1].count("\t") == 3
    assert lines[1].endswith("\t0.5")


def test_paired_corpus_rejects_duplicate_ids(tmp_path):
    path = tmp_path / "pairs.tsv"
    path.write_text("u1\ta\tb\nu1\tc\td\n", encoding="utf-8")
    with pytest.raises(CorpusFormatError, match="duplicate"):
        load_paired_corpus(str(path))


def test_paired_corpus_error_includes_location(tmp_path):
    path = tmp_path / "pairs.tsv"
    path.write_text("u1\ta\tb\nu2\tonly-two-cols\n", encoding="utf-8")
    with pytest.raises(CorpusFormatError, match=r"pairs\.tsv:2"):
        load_paired_corpus(str(path))


def test_paired_corpus_rejects_bad_weight(tmp_path):
    path = tmp_path / "pairs.tsv"
    path.write_text("u1\ta\tb\tnot-a-number\n", encoding="utf-8")
    with pytest.raises(CorpusFormatError, match=":1"):
        load_paired_corpus(str(path))


def test_load_missing_file_raises_corpus_error(tmp_path):
    with pytest.raises(CorpusFormatError):
        load_paired_corpus(str(tmp_path / "absent.tsv"))


# ---------------------------------------------------------------------------
# n-best corpus i/o


def test_nbest_round_trip(tmp_path):
    lists = [
        NBestList(
            id="u1",
            entries=(
                NBestEntry(rank=1, score=0.1, tokens=("a", "b")),
                NBestEntry(rank=2, score=0.2, tokens=()),
            ),
        ),
        NBestList(id="u2", entries=(NBestEntry(rank=1, score=0.3, tokens=("c",)),)),
    ]
    path = tmp_path / "nbest.tsv"
    write_nbest_corpus(lists, str(path))
    assert load_nbest_corpus(str(path)) == lists


def test_nbest_load_rejects_rank_gap(tmp_path):
    path = tmp_path / "nbest.tsv"
    path.write_text("u1\t1\t0.1\ta\nu1\t3\t0.2\tb\n", encoding="utf-8")
    with pytest.raises(CorpusFormatError, match="contiguous"):
        load_nbest_corpus(str(path))


def test_nbest_load_rejects_interleaved_ids(tmp_path):
    path = tmp_path / "nbest.tsv"
    path.write_text(
        "u1\t1\t0.1\ta\nu2\t1\t0.1\tb\nu1\t2\t0.2\tc\n", encoding="utf-8"
    )
    with pytest.raises(CorpusFormatError):
        load_nbest_corpus(str(path))


# ---------------------------------------------------------------------------
# transcripts i/o


def test_transcripts_round_trip_allows_empty_text(tmp_path):
    utts = [Utterance(id="u1", tokens=("a", "b")), Utterance(id="u2", tokens=())]
    path = tmp_path / "refs.tsv"
    write_transcripts(utts, str(path))
    assert load_transcripts(str(path)) == utts


# ---------------------------------------------------------------------------
# n-best expansion


def _lists():
    return [
        NBestList(
            id="u1",
            entries=(
                NBestEntry(rank=1, score=0.1, tokens=("a",)),
                NBestEntry(rank=2, score=0.2, tokens=("b",)),
                NBestEntry(rank=3, score=0.3, tokens=("c",)),
            ),
        ),
        NBestList(id="u2", entries=(NBestEntry(rank=1, score=0.1, tokens=("d",)),)),
    ]


def test_expand_uniform_weights_sum_to_one_per_list():
    pairs = expand_nbest_to_pairs(_lists(), {"u1": ("r",), "u2": ("s",)}, n=2)
    by_utt: dict[str, float] = {}
    for p in pairs:
        by_utt.setdefault(p.id.split("#")[0], 0.0)
        by_utt[p.id.split("#")[0]] += p.weight
    assert by_utt["u1"] == pytest.approx(1.0)
    assert by_utt["u2"] == pytest.approx(1.0)
    assert [p.id for p in pairs] == ["u1#1", "u1#2", "u2#1"]
    assert pairs[0].weight == pytest.approx(0.5)


def test_expand_caps_at_list_length():
    pairs = expand_nbest_to_pairs(_lists(), {"u1": ("r",), "u2": ("s",)}, n=100)
    assert len(pairs) == 4
    assert pairs[0].weight == pytest.approx(1 / 3)


def test_expand_rank_weighting_proportional_to_inverse_rank():
    pairs = expand_nbest_to_pairs(
        _lists(), {"u1": ("r",), "u2": ("s",)}, n=3, weighting="rank"
    )
    u1 = [p.weight for p in pairs if p.id.startswith("u1#")]
    total = 1 + 0.5 + 1 / 3
    assert u1 == pytest.approx([1 / total, 0.5 / total, (1 / 3) / total])
    assert sum(u1) == pytest.approx(1.0)


def test_expand_requires_reference():
    with pytest.raises(CorpusFormatError, match="u2"):
        expand_nbest_to_pairs(_lists(), {"u1": ("r",)}, n=1)


def test_expand_rejects_bad_arguments():
    with pytest.raises(ValueError):
        expand_nbest_to_pairs(_lists(), {"u1": ("r",), "u2": ("s",)}, n=0)
    with pytest.raises(ValueError):
        expand_nbest_to_pairs(
            _lists(), {"u1": ("r",), "u2": ("s",)}, n=1, weighting="softmax"
        )


# ---------------------------------------------------------------------------
# property: write -> load is the identity on valid corpora

_token = st.text(
    alphabet=st.characters(whitelist_categories=("Ll",), max_codepoint=0x2FF),
    min_size=1,
    max_size=6,
)
_tokens = st.lists(_token, max_size=5).map(tuple)


@given(
    st.lists(
        st.tuples(_tokens, _tokens.filter(bool), st.floats(0.01, 8.0)),
        max_size=8,
    )
)
def test_paired_corpus_write_load_identity(rows):
    import tempfile, os

    pairs = [
        UtterancePair(id=f"u{i}", hypothesis=h, reference=r, weight=round(w, 3))
        for i, (h, r, w) in enumerate(rows)
    ]
    fd, path = tempfile.mkstemp(suffix=".tsv")
    os.close(fd)
    try:
        write_paired_corpus(pairs, path)
        assert load_paired_corpus(path) == pairs
    finally:
        os.unlink(path)
