"""Exception hierarchy for t2tmap.

Each error family maps to a stable CLI exit code (see ``t2tmap.cli``):

* :class:`CorpusFormatError` -- malformed input data files (exit 2)
* :class:`AlignmentError` -- alignment / EM failures (exit 3)
* :class:`EstimationError` -- language-model estimation failures (exit 4)
* :class:`TransducerFormatError` -- malformed transducer files (exit 5)
* :class:`EvalMismatchError` -- hypothesis/reference set mismatches (exit 6)
"""

from __future__ import annotations


class T2TError(Exception):
    """Base class for all t2tmap errors."""


class CorpusFormatError(T2TError):
    """A corpus, rules, or config file is malformed."""


class AlignmentError(T2TError):
    """Alignment model training or application failed."""


class UnalignablePairError(AlignmentError):
    """A specific utterance pair admits no alignment path."""


class EstimationError(T2TError):
    """N-gram model estimation produced an invalid distribution."""


class TransducerFormatError(T2TError):
    """A serialized transducer file is malformed or unreadable."""


class NoPathError(T2TError):
    """Decoding found no complete path through the transducer.

    ``matched_prefix`` holds the longest input prefix that was consumed
    on any partial path before the search was exhausted.
    """

    def __init__(self, message: str, matched_prefix: tuple[str, ...] = ()):
        super().__init__(message)
        self.matched_prefix = tuple(matched_prefix)


class EvalMismatchError(T2TError):
    """Hypothesis and reference sets do not describe the same utterances."""
