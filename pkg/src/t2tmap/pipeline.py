"""End-to-end pipeline: synthesize, align, estimate, compile, decode, score.

Driven by a flat ``key = value`` config file.  All stage outputs are
written under one output directory so a run is fully inspectable:
synthetic corpora, aligned corpus, language model, transducer, corrected
transcripts, reports, and (optionally) figures.
"""

from __future__ import annotations

import logging
import os
import time
from dataclasses import dataclass, field, fields

from . import figures
from .alignment import AlignmentConfig, align_corpus, em_train, write_aligned_corpus
from .corpus import (
    Utterance,
    expand_nbest_to_pairs,
    load_transcripts,
    write_nbest_corpus,
    write_paired_corpus,
    write_transcripts,
)
from .errors import CorpusFormatError
from .ngram import count_ngrams, estimate_modified_kneser_ney, perplexity, write_model
from .synthgen import CorruptionModel, SynthConfig, generate_corpus, load_rules
from .transducer import (
    DecodeConfig,
    apply_corpus,
    build_transducer,
    top_transcripts,
    write_decode_results,
    write_transducer,
)
from .wer import WerReport, corpus_wer, write_report_json, write_report_tsv

logger = logging.getLogger(__name__)


@dataclass
class PipelineConfig:
    """Settings for one full run; every field has a config-file key."""

    refs_train: str = ""
    refs_test: str = ""
    rules: str = ""
    seed: int = 42
    nbest_size: int = 25
    deletion_prob: float = 0.05
    temperature: float = 0.1
    nbest_train: tuple[int, ...] = (25, 1)
    order: int = 5
    max_x: int = 3
    max_y: int = 3
    em_iters: int = 20
    em_epsilon: float = 1e-6
    decode_nbest: int = 500
    topk: int = 1
    passthrough_penalty: float | None = 8.0
    beam: float | None = None
    reference_wer: float | None = None
    figures: bool = True


_BOOL_VALUES = {"true": True, "false": False, "yes": True, "no": False}


def _parse_value(name: str, text: str, current):
    if name in ("passthrough_penalty", "beam", "reference_wer"):
        return None if text.lower() == "none" else float(text)
    if name == "nbest_train":
        values = tuple(int(part) for part in text.split())
        if not values or any(v < 1 for v in values):
            raise ValueError(f"nbest_train needs positive integers, got {text!r}")
        return values
    if isinstance(current, bool):
        lowered = text.lower()
        if lowered not in _BOOL_VALUES:
            raise ValueError(f"{name} must be true/false, got {text!r}")
        return _BOOL_VALUES[lowered]
    if isinstance(current, int):
        return int(text)
    if isinstance(current, float):
        return float(text)
    return text


def load_pipeline_config(path: str) -> PipelineConfig:
    """Parse a ``key = value`` config file; paths are resolved relative to
    the config file's directory."""
    config = PipelineConfig()
    valid = {f.name for f in fields(PipelineConfig)}
    base = os.path.dirname(os.path.abspath(path))
    try:
        fh = open(path, encoding="utf-8")
    except OSError as exc:
        raise CorpusFormatError(f"cannot read config file: {exc}") from None
    with fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise CorpusFormatError(
                    f"{path}:{lineno}: expected 'key = value', got {line!r}"
                )
            name, _, text = line.partition("=")
            name = name.strip()
            text = text.strip()
            if name not in valid:
                raise CorpusFormatError(
                    f"{path}:{lineno}: unknown config key {name!r}"
                )
            try:
                value = _parse_value(name, text, getattr(config, name))
            except ValueError as exc:
                raise CorpusFormatError(f"{path}:{lineno}: {exc}") from None
            setattr(config, name, value)
    for name in ("refs_train", "refs_test", "rules"):
        value = getattr(config, name)
        if not value:
            raise CorpusFormatError(f"{path}: missing required key {name!r}")
        setattr(config, name, os.path.join(base, value))
    return config


@dataclass
class VariantResult:
    """Artifacts and scores for one training-expansion variant."""

    nbest_train: int
    report: WerReport
    model_perplexity: float
    paths: dict[str, str] = field(default_factory=dict)


@dataclass
class PipelineResult:
    """Everything a run produced, keyed for inspection."""

    raw_report: WerReport
    variants: list[VariantResult]
    paths: dict[str, str] = field(default_factory=dict)
    timings: dict[str, float] = field(default_factory=dict)


def run_pipeline(config: PipelineConfig, out_dir: str) -> PipelineResult:
    """Run the full experiment described by ``config`` under ``out_dir``.

    The test corpus is corrupted with an independent stream (seed + 1) so
    train and test noise are uncorrelated.
    """
    os.makedirs(out_dir, exist_ok=True)
    timings: dict[str, float] = {}
    paths: dict[str, str] = {}

    def out(name: str) -> str:
        return os.path.join(out_dir, name)

    clock = time.perf_counter
    t0 = clock()
    refs_train = load_transcripts(config.refs_train)
    refs_test = load_transcripts(config.refs_test)
    rules = load_rules(config.rules)
    synth = SynthConfig(
        nbest_size=config.nbest_size,
        alternative_temperature=config.temperature,
    )
    train_model = CorruptionModel(
        rules=rules, word_deletion_prob=config.deletion_prob, seed=config.seed
    )
    test_model = CorruptionModel(
        rules=rules,
        word_deletion_prob=config.deletion_prob,
        seed=config.seed + 1,
    )
    train_pairs, train_nbest = generate_corpus(refs_train, train_model, synth)
    test_pairs, _ = generate_corpus(refs_test, test_model, synth)
    paths["synth_train"] = out("synth_train.tsv")
    paths["synth_train_nbest"] = out("synth_train.nbest.tsv")
    paths["synth_test"] = out("synth_test.tsv")
    write_paired_corpus(train_pairs, paths["synth_train"])
    write_nbest_corpus(train_nbest, paths["synth_train_nbest"])
    write_paired_corpus(test_pairs, paths["synth_test"])
    timings["synthesize"] = clock() - t0
    logger.info("synthesized %d train / %d test utterances", len(train_pairs), len(test_pairs))

    test_inputs = [
        Utterance(id=pair.id, tokens=pair.hypothesis) for pair in test_pairs
    ]
    raw_report = corpus_wer(test_inputs, refs_test, config.reference_wer)
    paths["raw_report"] = out("raw_report.tsv")
    write_report_tsv(raw_report, paths["raw_report"])
    write_report_json(raw_report, out("raw_report.json"))
    logger.info("raw hypothesis WER %.4f", raw_report.wer)

    references = {utt.id: utt.tokens for utt in refs_train}
    align_config = AlignmentConfig(
        max_x=config.max_x,
        max_y=config.max_y,
        max_iterations=config.em_iters,
        convergence_epsilon=config.em_epsilon,
    )
    decode_config = DecodeConfig(
        nbest=config.decode_nbest,
        beam=config.beam,
        passthrough_penalty=config.passthrough_penalty,
        output_top_k=config.topk,
    )

    variants: list[VariantResult] = []
    for n_train in config.nbest_train:
        tag = f"v{n_train}"
        variant_dir = out(tag)
        os.makedirs(variant_dir, exist_ok=True)

        def vout(name: str) -> str:
            return os.path.join(variant_dir, name)

        t0 = clock()
        expansion = expand_nbest_to_pairs(train_nbest, references, n_train)
        alignment_model = em_train(expansion, align_config)
        aligned, skipped = align_corpus(alignment_model, expansion, align_config)
        write_aligned_corpus(aligned, vout("aligned.tsv"))
        timings[f"{tag}/align"] = clock() - t0
        if skipped:
            logger.warning("%s: %d pairs skipped during alignment", tag, len(skipped))

        t0 = clock()
        counts = count_ngrams(aligned, config.order)
        lm = estimate_modified_kneser_ney(counts)
        write_model(lm, vout("model.arpa"))
        ppl = perplexity(lm, aligned)
        timings[f"{tag}/estimate"] = clock() - t0
        logger.info("%s: training-set perplexity %.3f", tag, ppl)

        t0 = clock()
        fst = build_transducer(lm, config.passthrough_penalty)
        write_transducer(fst, vout("mapping.fst"))
        timings[f"{tag}/compile"] = clock() - t0
        logger.info("%s: transducer has %d states / %d arcs", tag, fst.n_states, fst.n_arcs)

        t0 = clock()
        results = apply_corpus(fst, test_inputs, decode_config)
        write_decode_results(results, vout("corrected.nbest.tsv"))
        corrected = top_transcripts(results)
        write_transcripts(corrected, vout("corrected.tsv"))
        timings[f"{tag}/decode"] = clock() - t0

        report = corpus_wer(corrected, refs_test, config.reference_wer)
        write_report_tsv(report, vout("report.tsv"))
        write_report_json(report, vout("report.json"))
        logger.info("%s: corrected WER %.4f (raw %.4f)", tag, report.wer, raw_report.wer)
        if config.figures:
            figures.save_error_breakdown(report, vout("errors.png"))
            figures.save_wer_histogram(report, vout("wer_hist.png"))
        variants.append(
            VariantResult(
                nbest_train=n_train,
                report=report,
                model_perplexity=ppl,
                paths={
                    "aligned": vout("aligned.tsv"),
                    "model": vout("model.arpa"),
                    "fst": vout("mapping.fst"),
                    "corrected_nbest": vout("corrected.nbest.tsv"),
                    "corrected": vout("corrected.tsv"),
                    "report": vout("report.tsv"),
                },
            )
        )

    paths["summary"] = out("summary.tsv")
    with open(paths["summary"], "w", encoding="utf-8", newline="\n") as fh:
        fh.write("system\twer\tnwer\n")
        rows = [("raw", raw_report)] + [
            (f"corrected[n={v.nbest_train}]", v.report) for v in variants
        ]
        for label, report in rows:
            nwer_text = "-" if report.nwer is None else f"{report.nwer:.6f}"
            fh.write(f"{label}\t{report.wer:.6f}\t{nwer_text}\n")
    if config.figures:
        figures.save_summary_chart(
            [label for label, _ in rows],
            [report.wer for _, report in rows],
            out("summary.png"),
        )
        paths["summary_figure"] = out("summary.png")
    return PipelineResult(
        raw_report=raw_report,
        variants=variants,
        paths=paths,
        timings=timings,
    )
