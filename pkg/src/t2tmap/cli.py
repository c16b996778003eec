"""Command-line interface.

Subcommands cover every pipeline stage plus the full pipeline driver:

* ``synth``     corrupt clean transcripts into paired + N-best corpora
* ``align``     train the alignment model and write the aligned corpus
* ``train``     estimate the smoothed joint n-gram model (and transducer)
* ``apply``     decode utterances through a compiled transducer
* ``eval``      score hypotheses against references
* ``pipeline``  run synth -> align -> train -> apply -> eval end to end

Exit codes: 0 success, 2 bad input data or arguments, 3 alignment failure,
4 estimation failure, 5 bad transducer file, 6 evaluation set mismatch.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from . import figures, pipeline
from .alignment import (
    AlignmentConfig,
    align_corpus,
    em_train,
    load_aligned_corpus,
    write_aligned_corpus,
    write_alignment_model,
)
from .corpus import (
    expand_nbest_to_pairs,
    load_nbest_corpus,
    load_paired_corpus,
    load_transcripts,
    write_nbest_corpus,
    write_paired_corpus,
    write_transcripts,
)
from .errors import (
    AlignmentError,
    CorpusFormatError,
    EstimationError,
    EvalMismatchError,
    TransducerFormatError,
)
from .ngram import (
    count_ngrams,
    estimate_modified_kneser_ney,
    load_model,
    perplexity,
    write_model,
)
from .synthgen import CorruptionModel, SynthConfig, generate_corpus, load_rules
from .transducer import (
    DecodeConfig,
    apply_corpus,
    build_transducer,
    load_transducer,
    top_transcripts,
    write_decode_results,
    write_transducer,
)
from .wer import corpus_wer, write_report_json, write_report_tsv

logger = logging.getLogger(__name__)

_EXIT_CODES = (
    (CorpusFormatError, 2),
    (ValueError, 2),
    (AlignmentError, 3),
    (EstimationError, 4),
    (TransducerFormatError, 5),
    (EvalMismatchError, 6),
)
_EXIT_ERRORS = tuple(error_type for error_type, _ in _EXIT_CODES)


def _add_synth(subparsers) -> None:
    p = subparsers.add_parser(
        "synth",
        help="corrupt clean transcripts into paired and N-best corpora",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    p.add_argument("--refs", required=True, help="clean transcripts TSV (id<TAB>text)")
    p.add_argument("--rules", required=True, help="corruption rules TSV")
    p.add_argument("--seed", type=int, default=42, help="corpus random seed")
    p.add_argument("--nbest", type=int, default=25, help="candidates per utterance")
    p.add_argument(
        "--deletion-prob", type=float, default=0.05, help="per-word deletion probability"
    )
    p.add_argument(
        "--temperature",
        type=float,
        default=0.1,
        help="rank decay for alternative candidates",
    )
    p.add_argument("--out-dir", required=True, help="output directory")
    p.set_defaults(run=_run_synth)


def _run_synth(args) -> int:
    model = CorruptionModel(
        rules=load_rules(args.rules),
        word_deletion_prob=args.deletion_prob,
        seed=args.seed,
    )
    config = SynthConfig(nbest_size=args.nbest, alternative_temperature=args.temperature)
    refs = load_transcripts(args.refs)
    pairs, nbest = generate_corpus(refs, model, config)
    os.makedirs(args.out_dir, exist_ok=True)
    paired_path = os.path.join(args.out_dir, "synth.tsv")
    nbest_path = os.path.join(args.out_dir, "synth.nbest.tsv")
    write_paired_corpus(pairs, paired_path)
    write_nbest_corpus(nbest, nbest_path)
    print(f"wrote {len(pairs)} pairs to {paired_path}")
    print(f"wrote {len(nbest)} N-best lists to {nbest_path}")
    return 0


def _add_align(subparsers) -> None:
    p = subparsers.add_parser(
        "align",
        help="train the alignment model and Viterbi-align the corpus",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    source = p.add_mutually_exclusive_group(required=True)
    source.add_argument("--corpus", help="paired corpus TSV (id<TAB>hyp<TAB>ref)")
    source.add_argument(
        "--nbest-corpus", help="N-best corpus TSV (id<TAB>rank<TAB>score<TAB>tokens)"
    )
    p.add_argument(
        "--refs", help="clean transcripts TSV (required with --nbest-corpus)"
    )
    p.add_argument(
        "--nbest-train",
        type=int,
        default=25,
        help="candidates per list to expand (with --nbest-corpus)",
    )
    p.add_argument("--max-x", type=int, default=3, help="max source span per symbol")
    p.add_argument("--max-y", type=int, default=3, help="max target span per symbol")
    p.add_argument("--iters", type=int, default=20, help="max EM iterations")
    p.add_argument(
        "--epsilon",
        type=float,
        default=1e-6,
        help="relative log-likelihood gain that stops EM",
    )
    p.add_argument("--out", required=True, help="aligned corpus output path")
    p.add_argument("--model-out", help="also write the alignment model here")
    p.set_defaults(run=_run_align)


def _run_align(args) -> int:
    if args.corpus:
        pairs = load_paired_corpus(args.corpus)
    else:
        if not args.refs:
            raise CorpusFormatError("--nbest-corpus requires --refs")
        lists = load_nbest_corpus(args.nbest_corpus)
        references = {utt.id: utt.tokens for utt in load_transcripts(args.refs)}
        pairs = expand_nbest_to_pairs(lists, references, args.nbest_train)
    config = AlignmentConfig(
        max_x=args.max_x,
        max_y=args.max_y,
        max_iterations=args.iters,
        convergence_epsilon=args.epsilon,
    )
    model = em_train(pairs, config)
    for iteration, ll in enumerate(model.log_likelihoods, start=1):
        print(f"iteration {iteration}: log-likelihood {ll:.6f}")
    aligned, skipped = align_corpus(model, pairs, config)
    write_aligned_corpus(aligned, args.out)
    print(f"wrote {len(aligned)} aligned utterances to {args.out}")
    if skipped:
        print(f"skipped {len(skipped)} unalignable pairs")
    if args.model_out:
        write_alignment_model(model, args.model_out)
        print(
            f"wrote alignment model ({len(model.probabilities)} symbols) "
            f"to {args.model_out}"
        )
    return 0


def _add_train(subparsers) -> None:
    p = subparsers.add_parser(
        "train",
        help="estimate the smoothed joint n-gram model from an aligned corpus",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    p.add_argument("--aligned", required=True, help="aligned corpus TSV")
    p.add_argument("--order", type=int, default=5, help="model order (1..9)")
    p.add_argument("--out", required=True, help="model output path")
    p.add_argument("--fst", help="also compile and write the transducer here")
    p.add_argument(
        "--passthrough-penalty",
        type=float,
        default=8.0,
        help="cost of copying an unmapped token through the transducer",
    )
    p.add_argument(
        "--no-passthrough",
        action="store_true",
        help="compile without the match-anything passthrough loop",
    )
    p.set_defaults(run=_run_train)


def _run_train(args) -> int:
    aligned = load_aligned_corpus(args.aligned)
    counts = count_ngrams(aligned, args.order)
    model = estimate_modified_kneser_ney(counts)
    write_model(model, args.out)
    print(
        f"wrote order-{model.order} model "
        f"({len(model.logprobs)} grams) to {args.out}"
    )
    print(f"training-set perplexity: {perplexity(model, aligned):.4f}")
    if args.fst:
        penalty = None if args.no_passthrough else args.passthrough_penalty
        fst = build_transducer(model, penalty)
        write_transducer(fst, args.fst)
        print(
            f"wrote transducer ({fst.n_states} states, {fst.n_arcs} arcs) "
            f"to {args.fst}"
        )
    return 0


def _add_apply(subparsers) -> None:
    p = subparsers.add_parser(
        "apply",
        help="decode utterances through a compiled transducer",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    p.add_argument("--fst", required=True, help="transducer file")
    p.add_argument("--input", required=True, help="transcripts TSV to decode")
    p.add_argument("--nbest", type=int, default=500, help="search candidate budget")
    p.add_argument("--topk", type=int, default=1, help="distinct outputs to keep")
    p.add_argument("--beam", type=float, help="prune paths this far above the best")
    p.add_argument(
        "--passthrough-penalty",
        type=float,
        default=8.0,
        help="cost of copying an unmapped token through",
    )
    p.add_argument(
        "--no-passthrough",
        action="store_true",
        help="disable the match-anything passthrough during search",
    )
    p.add_argument("--out", required=True, help="ranked outputs TSV path")
    p.add_argument("--transcript-out", help="also write best outputs as transcripts")
    p.set_defaults(run=_run_apply)


def _run_apply(args) -> int:
    fst = load_transducer(args.fst)
    utterances = load_transcripts(args.input)
    config = DecodeConfig(
        nbest=args.nbest,
        beam=args.beam,
        passthrough_penalty=None if args.no_passthrough else args.passthrough_penalty,
        output_top_k=args.topk,
    )
    results = apply_corpus(fst, utterances, config)
    write_decode_results(results, args.out)
    failures = sum(1 for result in results if result.failed)
    print(f"decoded {len(results)} utterances to {args.out}")
    if failures:
        print(f"{failures} utterances had no path and were passed through")
    if args.transcript_out:
        write_transcripts(top_transcripts(results), args.transcript_out)
        print(f"wrote best transcripts to {args.transcript_out}")
    return 0


def _add_eval(subparsers) -> None:
    p = subparsers.add_parser(
        "eval",
        help="score hypothesis transcripts against references",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    p.add_argument("--hyp", required=True, help="hypothesis transcripts TSV")
    p.add_argument("--ref", required=True, help="reference transcripts TSV")
    normalizer = p.add_mutually_exclusive_group()
    normalizer.add_argument(
        "--reference-wer",
        type=float,
        help="external reference system WER for normalized error rate",
    )
    normalizer.add_argument(
        "--baseline-report",
        help="report JSON whose 'wer' normalizes the error rate",
    )
    p.add_argument("--out-tsv", help="write the per-utterance report here")
    p.add_argument("--out-json", help="write the summary JSON here")
    p.add_argument("--figures-dir", help="render report figures into this directory")
    p.set_defaults(run=_run_eval)


def _run_eval(args) -> int:
    reference_wer = args.reference_wer
    if args.baseline_report:
        try:
            with open(args.baseline_report, encoding="utf-8") as fh:
                baseline = json.load(fh)
            reference_wer = float(baseline["wer"])
        except (OSError, ValueError, KeyError, TypeError) as exc:
            raise CorpusFormatError(
                f"cannot read baseline report {args.baseline_report!r}: {exc}"
            ) from None
    hypotheses = load_transcripts(args.hyp)
    references = load_transcripts(args.ref)
    report = corpus_wer(hypotheses, references, reference_wer)
    print(
        f"WER {report.wer:.4f} "
        f"({report.substitutions} sub, {report.deletions} del, "
        f"{report.insertions} ins over {report.ref_words} reference words)"
    )
    if report.nwer is not None:
        print(f"normalized WER {report.nwer:.4f}")
    if args.out_tsv:
        write_report_tsv(report, args.out_tsv)
        print(f"wrote report to {args.out_tsv}")
    if args.out_json:
        write_report_json(report, args.out_json)
        print(f"wrote summary to {args.out_json}")
    if args.figures_dir:
        os.makedirs(args.figures_dir, exist_ok=True)
        breakdown = os.path.join(args.figures_dir, "errors.png")
        histogram = os.path.join(args.figures_dir, "wer_hist.png")
        figures.save_error_breakdown(report, breakdown)
        figures.save_wer_histogram(report, histogram)
        print(f"wrote figures to {args.figures_dir}")
    return 0


def _add_pipeline(subparsers) -> None:
    p = subparsers.add_parser(
        "pipeline",
        help="run the full synth/align/train/apply/eval pipeline",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    p.add_argument("--config", required=True, help="pipeline config file")
    p.add_argument("--out-dir", required=True, help="output directory")
    p.add_argument("--seed", type=int, help="override the configured seed")
    p.add_argument(
        "--no-figures", action="store_true", help="skip figure rendering"
    )
    p.set_defaults(run=_run_pipeline)


def _run_pipeline(args) -> int:
    config = pipeline.load_pipeline_config(args.config)
    if args.seed is not None:
        config.seed = args.seed
    if args.no_figures:
        config.figures = False
    result = pipeline.run_pipeline(config, args.out_dir)
    rows = [("raw", result.raw_report)] + [
        (f"corrected[n={v.nbest_train}]", v.report) for v in result.variants
    ]
    for label, report in rows:
        suffix = "" if report.nwer is None else f"  nwer {report.nwer:.4f}"
        print(f"{label}: WER {report.wer:.4f}{suffix}")
    print(f"artifacts under {args.out_dir}")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="t2t",
        description=(
            "Text-to-text mapping for ASR output: learn word-sequence "
            "corrections from paired corpora and apply them as a transducer."
        ),
        epilog=(
            "All stages run single-threaded; the T2T_THREADS environment "
            "variable is accepted as an upper bound for compatibility."
        ),
    )
    parser.add_argument(
        "-q", "--quiet", action="store_true", help="only log warnings and errors"
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    _add_synth(subparsers)
    _add_align(subparsers)
    _add_train(subparsers)
    _add_apply(subparsers)
    _add_eval(subparsers)
    _add_pipeline(subparsers)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING if args.quiet else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    threads = os.environ.get("T2T_THREADS")
    if threads is not None:
        try:
            if int(threads) < 1:
                raise ValueError
        except ValueError:
            print(
                f"t2t: invalid T2T_THREADS value {threads!r}", file=sys.stderr
            )
            return 2
        logger.debug("T2T_THREADS=%s accepted (all stages are single-threaded)", threads)
    try:
        return args.run(args)
    except _EXIT_ERRORS as exc:
        for error_type, code in _EXIT_CODES:
            if isinstance(exc, error_type):
                print(f"t2t: error: {exc}", file=sys.stderr)
                return code
        raise  # unreachable


if __name__ == "__main__":
    sys.exit(main())
