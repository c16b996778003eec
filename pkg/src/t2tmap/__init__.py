"""Text-to-text mapping for ASR output.

Learns word-sequence corrections from paired (hypothesis, reference)
corpora: pairs are decomposed into many-to-many monotone alignments, a
joint n-gram model with modified Kneser-Ney smoothing is estimated over
the alignment symbols, and the model is compiled into a word-level
weighted transducer that rewrites new hypotheses via N-best search.
Includes a synthetic noisy-channel corpus generator and WER evaluation.
"""

from .alignment import (
    AlignedUtterance,
    AlignmentConfig,
    AlignmentModel,
    PairSymbol,
    align_corpus,
    em_train,
    load_aligned_corpus,
    load_alignment_model,
    parse_symbol,
    render_symbol,
    viterbi_align,
    write_aligned_corpus,
    write_alignment_model,
)
from .corpus import (
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
from .errors import (
    AlignmentError,
    CorpusFormatError,
    EstimationError,
    EvalMismatchError,
    NoPathError,
    T2TError,
    TransducerFormatError,
    UnalignablePairError,
)
from .ngram import (
    Discounts,
    JointNGramModel,
    NGramCounts,
    count_ngrams,
    estimate_discounts,
    estimate_modified_kneser_ney,
    load_model,
    perplexity,
    write_model,
)
from .pipeline import (
    PipelineConfig,
    PipelineResult,
    load_pipeline_config,
    run_pipeline,
)
from .synthgen import (
    CorruptionModel,
    CorruptionRule,
    SynthConfig,
    corrupt_utterance,
    generate_corpus,
    load_rules,
)
from .transducer import (
    DecodeConfig,
    DecodeResult,
    MappingTransducer,
    apply_corpus,
    build_transducer,
    load_transducer,
    nbest_decode,
    top_transcripts,
    write_decode_results,
    write_transducer,
)
from .wer import (
    EditOps,
    WerReport,
    corpus_wer,
    edit_ops,
    nwer,
    relative_reduction,
    write_report_json,
    write_report_tsv,
)

__version__ = "0.1.0"
