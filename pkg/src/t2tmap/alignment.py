"""Many-to-many monotone alignment of token-sequence pairs via EM.

An alignment decomposes a (hypothesis, reference) pair into a sequence of
*pair symbols*, each coupling a short span of hypothesis tokens with a
short span of reference tokens (either side may be empty, not both).  A
single multinomial over pair symbols is fit by expectation-maximization
over the lattice of all monotone decompositions of every training pair,
then the most likely decomposition of each pair is recovered with Viterbi.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .corpus import UtterancePair
from .errors import AlignmentError, CorpusFormatError, UnalignablePairError

logger = logging.getLogger(__name__)

EPS_TOKEN = "<eps>"

#: Pairs whose hypothesis is longer than this many times ``max_x * |reference|``
#: are skipped rather than aligned; their lattices are degenerate.
LENGTH_GUARD_FACTOR = 10

#: Below this path likelihood the vectorized linear-space pass is deemed
#: underflowed and the pair is redone in log space.
_UNDERFLOW_LIKELIHOOD = 1e-280

#: Probability floor used when costing Viterbi edges.
_VITERBI_FLOOR = 1e-12


@dataclass(frozen=True)
class PairSymbol:
    """One alignment unit: a source token span paired with a target span."""

    source: tuple[str, ...]
    target: tuple[str, ...]

    def __post_init__(self) -> None:
        if not self.source and not self.target:
            raise ValueError("pair symbol must not be empty on both sides")
        if any(not tok for tok in self.source + self.target):
            raise ValueError("pair symbol tokens must be non-empty")

    @property
    def sort_key(self) -> tuple[tuple[str, ...], tuple[str, ...]]:
        return (self.source, self.target)


def _escape_token(token: str) -> str:
    return token.replace("\\", "\\\\").replace("|", "\\|").replace("}", "\\}")


def _render_side(tokens: tuple[str, ...]) -> str:
    if not tokens:
        return EPS_TOKEN
    return "|".join(_escape_token(tok) for tok in tokens)


def render_symbol(symbol: PairSymbol) -> str:
    """Render a pair symbol as ``src1|src2}tgt1|tgt2`` with escaping."""
    return f"{_render_side(symbol.source)}}}{_render_side(symbol.target)}"


def _split_unescaped(text: str, sep: str) -> list[str]:
    """Split on ``sep`` while honoring backslash escapes (kept verbatim)."""
    parts: list[str] = []
    buf: list[str] = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch == "\\":
            if i + 1 >= len(text):
                raise ValueError(f"dangling escape in {text!r}")
            buf.append(ch)
            buf.append(text[i + 1])
            i += 2
        elif ch == sep:
            parts.append("".join(buf))
            buf = []
            i += 1
        else:
            buf.append(ch)
            i += 1
    parts.append("".join(buf))
    return parts


def _unescape_token(text: str) -> str:
    out: list[str] = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch == "\\":
            if i + 1 >= len(text):
                raise ValueError(f"dangling escape in {text!r}")
            out.append(text[i + 1])
            i += 2
        else:
            out.append(ch)
            i += 1
    return "".join(out)


def _parse_side(text: str) -> tuple[str, ...]:
    if text == EPS_TOKEN:
        return ()
    return tuple(_unescape_token(part) for part in _split_unescaped(text, "|"))


def parse_symbol(text: str) -> PairSymbol:
    """Inverse of :func:`render_symbol`; raises ``ValueError`` on bad input."""
    sides = _split_unescaped(text, "}")
    if len(sides) != 2:
        raise ValueError(
            f"pair symbol {text!r} must contain exactly one unescaped '}}'"
        )
    try:
        return PairSymbol(source=_parse_side(sides[0]), target=_parse_side(sides[1]))
    except ValueError as exc:
        raise ValueError(f"invalid pair symbol {text!r}: {exc}") from None


@dataclass(frozen=True)
class AlignmentConfig:
    """Lattice shape and EM schedule for alignment training."""

    max_x: int = 3
    max_y: int = 3
    allow_source_deletion: bool = True
    allow_target_insertion: bool = True
    max_iterations: int = 20
    convergence_epsilon: float = 1e-6

    def __post_init__(self) -> None:
        if self.max_x < 1:
            raise ValueError(f"max_x must be >= 1, got {self.max_x}")
        if self.max_y < 1:
            raise ValueError(f"max_y must be >= 1, got {self.max_y}")
        if self.max_iterations < 1:
            raise ValueError(
                f"max_iterations must be >= 1, got {self.max_iterations}"
            )
        if self.convergence_epsilon < 0:
            raise ValueError(
                f"convergence_epsilon must be >= 0, got {self.convergence_epsilon}"
            )

    @property
    def moves(self) -> tuple[tuple[int, int], ...]:
        """All allowed (source span, target span) step sizes."""
        out = []
        for a in range(self.max_x + 1):
            for b in range(self.max_y + 1):
                if a + b == 0:
                    continue
                if a == 0 and not self.allow_target_insertion:
                    continue
                if b == 0 and not self.allow_source_deletion:
                    continue
                out.append((a, b))
        return tuple(out)


@dataclass(frozen=True)
class _Geometry:
    """Token-independent lattice structure for one (|hyp|, |ref|) shape.

    Nodes are the useful (reachable and co-reachable) grid points in
    row-major order, so node 0 is the start (0, 0) and ``final`` is
    (|hyp|, |ref|).  Edges are sorted by the source diagonal i+j, which is
    a topological order because every move advances i+j by at least one.
    """

    alignable: bool
    n_nodes: int
    final: int
    src: np.ndarray  # int32, edge source node ids, sorted by source diagonal
    dst: np.ndarray  # int32, edge destination node ids
    levels: np.ndarray  # int32, source diagonal i+j per edge
    spans: tuple[tuple[int, int, int, int], ...]  # (i, a, j, b) per edge


_EMPTY_I32 = np.empty(0, dtype=np.int32)


@lru_cache(maxsize=None)
def _geometry(n_src: int, n_tgt: int, moves: tuple[tuple[int, int], ...]) -> _Geometry:
    reach = [[False] * (n_tgt + 1) for _ in range(n_src + 1)]
    reach[0][0] = True
    for i in range(n_src + 1):
        for j in range(n_tgt + 1):
            if not reach[i][j]:
                continue
            for a, b in moves:
                if i + a <= n_src and j + b <= n_tgt:
                    reach[i + a][j + b] = True
    coreach = [[False] * (n_tgt + 1) for _ in range(n_src + 1)]
    coreach[n_src][n_tgt] = True
    for i in range(n_src, -1, -1):
        for j in range(n_tgt, -1, -1):
            if coreach[i][j]:
                continue
            for a, b in moves:
                if i + a <= n_src and j + b <= n_tgt and coreach[i + a][j + b]:
                    coreach[i][j] = True
                    break
    node_id: dict[tuple[int, int], int] = {}
    for i in range(n_src + 1):
        for j in range(n_tgt + 1):
            if reach[i][j] and coreach[i][j]:
                node_id[(i, j)] = len(node_id)
    if (0, 0) not in node_id or (n_src, n_tgt) not in node_id:
        return _Geometry(False, 0, -1, _EMPTY_I32, _EMPTY_I32, _EMPTY_I32, ())
    edges = []
    for (i, j), src in node_id.items():
        for a, b in moves:
            dst = node_id.get((i + a, j + b))
            if dst is not None:
                edges.append((i + j, src, dst, (i, a, j, b)))
    edges.sort(key=lambda e: e[0])
    return _Geometry(
        alignable=True,
        n_nodes=len(node_id),
        final=node_id[(n_src, n_tgt)],
        src=np.array([e[1] for e in edges], dtype=np.int32),
        dst=np.array([e[2] for e in edges], dtype=np.int32),
        levels=np.array([e[0] for e in edges], dtype=np.int32),
        spans=tuple(e[3] for e in edges),
    )


@dataclass(frozen=True)
class AlignedUtterance:
    """A training pair decomposed into its Viterbi pair-symbol sequence."""

    id: str
    symbols: tuple[PairSymbol, ...]
    weight: float = 1.0


@dataclass
class AlignmentModel:
    """Multinomial over pair symbols plus EM training diagnostics."""

    probabilities: dict[PairSymbol, float]
    log_likelihoods: list[float] = field(default_factory=list)
    skipped_pairs: int = 0
    _by_sides: dict | None = field(
        default=None, init=False, repr=False, compare=False
    )

    def prob_by_sides(self) -> dict[tuple[tuple[str, ...], tuple[str, ...]], float]:
        """Probabilities keyed by (source, target) token tuples."""
        if self._by_sides is None:
            self._by_sides = {
                (sym.source, sym.target): p for sym, p in self.probabilities.items()
            }
        return self._by_sides


def _exceeds_guard(pair: UtterancePair, config: AlignmentConfig) -> bool:
    return len(pair.hypothesis) > LENGTH_GUARD_FACTOR * config.max_x * len(
        pair.reference
    )


def _logadd(x: float, y: float) -> float:
    if x == float("-inf"):
        return y
    if y == float("-inf"):
        return x
    if x < y:
        x, y = y, x
    return x + math.log1p(math.exp(y - x))


def _forward_backward_log(
    hypothesis: tuple[str, ...],
    reference: tuple[str, ...],
    prob_of,
    config: AlignmentConfig,
) -> tuple[float, dict[tuple[tuple[str, ...], tuple[str, ...]], float]]:
    """Log-space forward-backward for one pair.

    ``prob_of(source_span, target_span)`` must return the symbol
    probability (0.0 for unknown symbols).  Returns the pair log-likelihood
    and the posterior expected count of every symbol on the lattice.  This
    is the numerically robust fallback for near-underflow pairs and doubles
    as an independent oracle for the vectorized pass in tests.
    """
    geo = _geometry(len(hypothesis), len(reference), config.moves)
    if not geo.alignable:
        return float("-inf"), {}
    neg_inf = float("-inf")
    n_edges = len(geo.spans)
    log_p = [neg_inf] * n_edges
    sides_of = []
    for k, (i, a, j, b) in enumerate(geo.spans):
        sides = (hypothesis[i : i + a], reference[j : j + b])
        sides_of.append(sides)
        p = prob_of(*sides)
        if p > 0.0:
            log_p[k] = math.log(p)
    la = [neg_inf] * geo.n_nodes
    la[0] = 0.0
    for k in range(n_edges):
        if la[geo.src[k]] != neg_inf and log_p[k] != neg_inf:
            dst = geo.dst[k]
            la[dst] = _logadd(la[dst], la[geo.src[k]] + log_p[k])
    log_likelihood = la[geo.final]
    if log_likelihood == neg_inf:
        return neg_inf, {}
    lb = [neg_inf] * geo.n_nodes
    lb[geo.final] = 0.0
    for k in range(n_edges - 1, -1, -1):
        if lb[geo.dst[k]] != neg_inf and log_p[k] != neg_inf:
            src = geo.src[k]
            lb[src] = _logadd(lb[src], log_p[k] + lb[geo.dst[k]])
    counts: dict[tuple[tuple[str, ...], tuple[str, ...]], float] = {}
    for k in range(n_edges):
        if log_p[k] == neg_inf:
            continue
        total = la[geo.src[k]] + log_p[k] + lb[geo.dst[k]]
        if total == neg_inf:
            continue
        sides = sides_of[k]
        counts[sides] = counts.get(sides, 0.0) + math.exp(total - log_likelihood)
    return log_likelihood, counts


class _Batch:
    """All training lattices concatenated into flat edge arrays.

    Edges from every pair are stably sorted by source diagonal so that one
    ascending sweep of level slices is a valid forward schedule for all
    pairs at once (node ids are disjoint across pairs).
    """

    def __init__(self, keys, weights, config: AlignmentConfig):
        moves = config.moves
        self.sym_index: dict[tuple[tuple[str, ...], tuple[str, ...]], int] = {}
        src_chunks: list[np.ndarray] = []
        dst_chunks: list[np.ndarray] = []
        sym_chunks: list[np.ndarray] = []
        lev_chunks: list[np.ndarray] = []
        starts: list[int] = []
        finals: list[int] = []
        node_pair_chunks: list[np.ndarray] = []
        offset = 0
        max_x = config.max_x
        max_y = config.max_y
        sym_index = self.sym_index
        for pair_idx, (hyp, ref) in enumerate(keys):
            geo = _geometry(len(hyp), len(ref), moves)
            hspans = [
                [hyp[i : i + a] for a in range(min(max_x, len(hyp) - i) + 1)]
                for i in range(len(hyp) + 1)
            ]
            tspans = [
                [ref[j : j + b] for b in range(min(max_y, len(ref) - j) + 1)]
                for j in range(len(ref) + 1)
            ]
            sym_chunks.append(
                np.fromiter(
                    (
                        sym_index.setdefault(
                            (hspans[i][a], tspans[j][b]), len(sym_index)
                        )
                        for i, a, j, b in geo.spans
                    ),
                    dtype=np.int64,
                    count=len(geo.spans),
                )
            )
            src_chunks.append(geo.src.astype(np.int64) + offset)
            dst_chunks.append(geo.dst.astype(np.int64) + offset)
            lev_chunks.append(geo.levels)
            node_pair_chunks.append(np.full(geo.n_nodes, pair_idx, dtype=np.int64))
            starts.append(offset)
            finals.append(offset + geo.final)
            offset += geo.n_nodes
        self.n_nodes = offset
        self.n_pairs = len(keys)
        self.weights = np.asarray(weights, dtype=np.float64)
        self.starts = np.asarray(starts, dtype=np.int64)
        self.finals = np.asarray(finals, dtype=np.int64)
        self.node_pair = np.concatenate(node_pair_chunks)
        levels = np.concatenate(lev_chunks)
        order = np.argsort(levels, kind="stable")
        self.src = np.concatenate(src_chunks)[order]
        self.dst = np.concatenate(dst_chunks)[order]
        self.sym = np.concatenate(sym_chunks)[order]
        sorted_levels = levels[order]
        bounds = np.flatnonzero(np.diff(sorted_levels)) + 1
        edge_starts = np.concatenate(([0], bounds))
        edge_ends = np.concatenate((bounds, [len(sorted_levels)]))
        self.level_slices = [
            slice(int(s), int(e)) for s, e in zip(edge_starts, edge_ends)
        ]

    def forward(self, probs: np.ndarray) -> np.ndarray:
        alpha = np.zeros(self.n_nodes)
        alpha[self.starts] = 1.0
        for sl in self.level_slices:
            np.add.at(
                alpha, self.dst[sl], alpha[self.src[sl]] * probs[self.sym[sl]]
            )
        return alpha

    def backward(self, probs: np.ndarray) -> np.ndarray:
        beta = np.zeros(self.n_nodes)
        beta[self.finals] = 1.0
        for sl in reversed(self.level_slices):
            np.add.at(
                beta, self.src[sl], probs[self.sym[sl]] * beta[self.dst[sl]]
            )
        return beta


_POSTERIOR_CHUNK = 1 << 22


def em_train(
    pairs: list[UtterancePair], config: AlignmentConfig | None = None
) -> AlignmentModel:
    """Fit the pair-symbol multinomial with EM over all monotone lattices.

    Identical (hypothesis, reference) pairs are merged with summed weights
    before training.  Pairs that exceed the lattice size guard or admit no
    monotone decomposition are skipped (counted per input pair, not per
    merged pair) and training proceeds without them.
    """
    config = config or AlignmentConfig()
    if not pairs:
        raise AlignmentError("no training pairs given")
    merged: dict[tuple[tuple[str, ...], tuple[str, ...]], float] = {}
    multiplicity: dict[tuple[tuple[str, ...], tuple[str, ...]], int] = {}
    for pair in pairs:
        key = (pair.hypothesis, pair.reference)
        merged[key] = merged.get(key, 0.0) + pair.weight
        multiplicity[key] = multiplicity.get(key, 0) + 1
    keys: list[tuple[tuple[str, ...], tuple[str, ...]]] = []
    weights: list[float] = []
    skipped = 0
    for key, weight in merged.items():
        hyp, ref = key
        too_long = len(hyp) > LENGTH_GUARD_FACTOR * config.max_x * len(ref)
        if too_long or not _geometry(len(hyp), len(ref), config.moves).alignable:
            skipped += multiplicity[key]
            logger.warning(
                "skipping unalignable pair (|hyp|=%d, |ref|=%d): %s",
                len(hyp),
                len(ref),
                " ".join(hyp[:8]) or "<empty>",
            )
            continue
        keys.append(key)
        weights.append(weight)
    if not keys:
        raise AlignmentError("all training pairs were unalignable")
    if skipped:
        logger.warning("skipped %d unalignable training pairs", skipped)

    batch = _Batch(keys, weights, config)
    n_syms = len(batch.sym_index)
    probs = np.full(n_syms, 1.0 / n_syms)
    log_likelihoods: list[float] = []
    previous = None
    for iteration in range(1, config.max_iterations + 1):
        alpha = batch.forward(probs)
        beta = batch.backward(probs)
        likelihood = alpha[batch.finals]
        bad = likelihood <= _UNDERFLOW_LIKELIHOOD
        safe = np.where(bad, 1.0, likelihood)
        pair_scale = np.where(bad, 0.0, batch.weights / safe)
        node_scale = pair_scale[batch.node_pair]
        counts = np.zeros(n_syms)
        n_edges = len(batch.sym)
        for lo in range(0, n_edges, _POSTERIOR_CHUNK):
            sl = slice(lo, min(lo + _POSTERIOR_CHUNK, n_edges))
            contrib = alpha[batch.src[sl]] * probs[batch.sym[sl]]
            contrib *= beta[batch.dst[sl]]
            contrib *= node_scale[batch.src[sl]]
            np.add.at(counts, batch.sym[sl], contrib)
        pair_ll = np.log(safe)

        def prob_of(s, t, _probs=probs):
            sid = batch.sym_index.get((s, t))
            return float(_probs[sid]) if sid is not None else 0.0

        for pos in np.flatnonzero(bad):
            hyp, ref = keys[pos]
            ll, posterior = _forward_backward_log(hyp, ref, prob_of, config)
            if ll == float("-inf"):
                raise AlignmentError(
                    "pair became unalignable during EM (all path symbols "
                    "have zero probability)"
                )
            pair_ll[pos] = ll
            w = batch.weights[pos]
            for sides, count in posterior.items():
                counts[batch.sym_index[sides]] += w * count
        total_ll = math.fsum(
            w * ll for w, ll in zip(batch.weights.tolist(), pair_ll.tolist())
        )
        if math.isnan(total_ll):
            raise AlignmentError("log-likelihood became NaN during EM")
        log_likelihoods.append(total_ll)
        logger.info(
            "EM iteration %d/%d: log-likelihood %.6f",
            iteration,
            config.max_iterations,
            total_ll,
        )
        total_count = float(counts.sum())
        if total_count <= 0.0:
            raise AlignmentError("EM produced no posterior mass")
        probs = counts / total_count
        if previous is not None:
            gain = (total_ll - previous) / max(abs(previous), 1e-12)
            if gain < config.convergence_epsilon:
                break
        previous = total_ll

    probabilities = {
        PairSymbol(source=src, target=tgt): float(probs[sid])
        for (src, tgt), sid in batch.sym_index.items()
        if probs[sid] > 0.0
    }
    return AlignmentModel(
        probabilities=probabilities,
        log_likelihoods=log_likelihoods,
        skipped_pairs=skipped,
    )


def viterbi_align(
    model: AlignmentModel,
    pair: UtterancePair,
    config: AlignmentConfig | None = None,
) -> AlignedUtterance:
    """Recover the best decomposition of one pair under the model.

    Minimizes (total cost, symbol count, symbol sequence) lexicographically,
    where an edge costs ``-log(max(p, 1e-12))``, so ties are broken
    deterministically.
    """
    config = config or AlignmentConfig()
    if _exceeds_guard(pair, config):
        raise UnalignablePairError(
            f"pair {pair.id!r}: hypothesis length {len(pair.hypothesis)} exceeds "
            f"the lattice size guard for reference length {len(pair.reference)}"
        )
    geo = _geometry(len(pair.hypothesis), len(pair.reference), config.moves)
    if not geo.alignable:
        raise UnalignablePairError(
            f"pair {pair.id!r}: no monotone decomposition exists"
        )
    prob = model.prob_by_sides()
    hyp, ref = pair.hypothesis, pair.reference
    best: list[tuple | None] = [None] * geo.n_nodes
    best[0] = (0.0, 0, ())
    for k, (i, a, j, b) in enumerate(geo.spans):
        src_state = best[geo.src[k]]
        if src_state is None:
            continue
        sides = (hyp[i : i + a], ref[j : j + b])
        p = prob.get(sides, 0.0)
        cost = -math.log(p if p > _VITERBI_FLOOR else _VITERBI_FLOOR)
        candidate = (
            src_state[0] + cost,
            src_state[1] + 1,
            src_state[2] + (sides,),
        )
        dst = geo.dst[k]
        if best[dst] is None or candidate < best[dst]:
            best[dst] = candidate
    final = best[geo.final]
    assert final is not None  # alignable lattices always reach the final node
    symbols = tuple(PairSymbol(source=s, target=t) for s, t in final[2])
    return AlignedUtterance(id=pair.id, symbols=symbols, weight=pair.weight)


def align_corpus(
    model: AlignmentModel,
    pairs: list[UtterancePair],
    config: AlignmentConfig | None = None,
) -> tuple[list[AlignedUtterance], list[str]]:
    """Viterbi-align every pair; returns (alignments, skipped pair ids)."""
    config = config or AlignmentConfig()
    cache: dict[tuple, tuple[PairSymbol, ...] | None] = {}
    aligned: list[AlignedUtterance] = []
    skipped: list[str] = []
    for pair in pairs:
        key = (pair.hypothesis, pair.reference)
        if key not in cache:
            try:
                cache[key] = viterbi_align(model, pair, config).symbols
            except UnalignablePairError:
                cache[key] = None
        symbols = cache[key]
        if symbols is None:
            logger.warning("skipping unalignable pair %r", pair.id)
            skipped.append(pair.id)
        else:
            aligned.append(
                AlignedUtterance(id=pair.id, symbols=symbols, weight=pair.weight)
            )
    return aligned, skipped


def write_aligned_corpus(alignments: list[AlignedUtterance], path: str) -> None:
    """Write ``id<TAB>weight<TAB>sym sym ...`` rows (canonical form)."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for utt in alignments:
            rendered = " ".join(render_symbol(sym) for sym in utt.symbols)
            fh.write(f"{utt.id}\t{utt.weight!r}\t{rendered}\n")


def load_aligned_corpus(path: str) -> list[AlignedUtterance]:
    """Load rows written by :func:`write_aligned_corpus`."""
    out: list[AlignedUtterance] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            cols = line.split("\t")
            if len(cols) != 3:
                raise CorpusFormatError(
                    f"{path}:{lineno}: expected 3 tab-separated columns, "
                    f"got {len(cols)}"
                )
            try:
                weight = float(cols[1])
                symbols = tuple(
                    parse_symbol(tok) for tok in cols[2].split(" ") if tok
                )
            except ValueError as exc:
                raise CorpusFormatError(f"{path}:{lineno}: {exc}") from None
            if weight <= 0:
                raise CorpusFormatError(
                    f"{path}:{lineno}: weight must be positive, got {cols[1]!r}"
                )
            out.append(AlignedUtterance(id=cols[0], symbols=symbols, weight=weight))
    return out


def write_alignment_model(model: AlignmentModel, path: str) -> None:
    """Write ``symbol<TAB>probability`` rows sorted by symbol."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for symbol in sorted(model.probabilities, key=lambda s: s.sort_key):
            fh.write(f"{render_symbol(symbol)}\t{model.probabilities[symbol]!r}\n")


def load_alignment_model(path: str) -> AlignmentModel:
    """Load rows written by :func:`write_alignment_model`."""
    probabilities: dict[PairSymbol, float] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            cols = line.split("\t")
            if len(cols) != 2:
                raise CorpusFormatError(
                    f"{path}:{lineno}: expected 2 tab-separated columns, "
                    f"got {len(cols)}"
                )
            try:
                symbol = parse_symbol(cols[0])
                prob = float(cols[1])
            except ValueError as exc:
                raise CorpusFormatError(f"{path}:{lineno}: {exc}") from None
            if not 0.0 < prob <= 1.0:
                raise CorpusFormatError(
                    f"{path}:{lineno}: probability must be in (0, 1], "
                    f"got {cols[1]!r}"
                )
            if symbol in probabilities:
                raise CorpusFormatError(
                    f"{path}:{lineno}: duplicate symbol {cols[0]!r}"
                )
            probabilities[symbol] = prob
    return AlignmentModel(probabilities=probabilities)
