"""Word-level weighted transducer compiled from a joint n-gram model.

States are the model's stored contexts plus intermediate chain states that
factor multi-token pair symbols into single-token arcs.  Costs are negative
natural-log probabilities.  Decoding is uniform-cost N-best search with
recombination on (state, input position, output prefix).
"""

from __future__ import annotations

import heapq
import itertools
import logging
import math
from collections import deque
from dataclasses import dataclass

from .corpus import Utterance
from .errors import EstimationError, NoPathError, TransducerFormatError
from .ngram import BOS, EOS, LN10, JointNGramModel, _sym_sort_key

logger = logging.getLogger(__name__)

EPS_ID = 0
UNK_ID = 1
EPS_LABEL = "<eps>"
UNK_LABEL = "<unk>"

#: Final cost used in the degenerate case of a model with no stored end
#: transition anywhere on the backoff chain.
_FALLBACK_FINAL_COST = 20.0

_COMPLETE = -1


@dataclass(frozen=True)
class DecodeConfig:
    """Search settings for N-best decoding."""

    nbest: int = 500
    beam: float | None = None
    passthrough_penalty: float | None = 8.0
    output_top_k: int = 1

    def __post_init__(self) -> None:
        if self.nbest < 1:
            raise ValueError(f"nbest must be >= 1, got {self.nbest}")
        if self.output_top_k < 1:
            raise ValueError(
                f"output_top_k must be >= 1, got {self.output_top_k}"
            )
        if self.output_top_k > self.nbest:
            raise ValueError(
                f"output_top_k ({self.output_top_k}) must not exceed "
                f"nbest ({self.nbest})"
            )
        if self.beam is not None and not self.beam > 0:
            raise ValueError(f"beam must be positive, got {self.beam}")
        if self.passthrough_penalty is not None and self.passthrough_penalty < 0:
            raise ValueError(
                f"passthrough_penalty must be >= 0, got "
                f"{self.passthrough_penalty}"
            )


@dataclass(frozen=True)
class DecodeResult:
    """Ranked distinct outputs for one utterance (best first)."""

    id: str
    candidates: tuple[tuple[tuple[str, ...], float], ...]
    failed: bool = False


class MappingTransducer:
    """Weighted finite-state transducer over word labels.

    Arcs are (input label id, output label id, cost, destination) per
    state; label id 0 is epsilon, label id 1 is the match-anything
    passthrough label, which consumes one input token and copies it to the
    output.
    """

    def __init__(
        self,
        order: int,
        isyms: list[str],
        osyms: list[str],
        arcs: list[list[tuple[int, int, float, int]]],
        finals: dict[int, float],
        start: int,
    ):
        self.order = order
        self.isyms = isyms
        self.osyms = osyms
        self.isym_id = {label: i for i, label in enumerate(isyms)}
        self.osym_id = {label: i for i, label in enumerate(osyms)}
        self.arcs = arcs
        self.finals = finals
        self.start = start
        self._index: list[dict] | None = None

    @property
    def n_states(self) -> int:
        return len(self.arcs)

    @property
    def n_arcs(self) -> int:
        return sum(len(state_arcs) for state_arcs in self.arcs)

    def build_index(self) -> list[dict]:
        """Per-state arc index: input label -> arcs, plus eps/unk lists."""
        if self._index is None:
            index = []
            for state_arcs in self.arcs:
                by_input: dict[int, list] = {}
                eps: list = []
                unk: list = []
                for ilab, olab, cost, dst in state_arcs:
                    if ilab == EPS_ID:
                        eps.append((olab, cost, dst))
                    elif ilab == UNK_ID:
                        unk.append((olab, cost, dst))
                    else:
                        by_input.setdefault(ilab, []).append((olab, cost, dst))
                index.append({"by_input": by_input, "eps": eps, "unk": unk})
            self._index = index
        return self._index


def build_transducer(
    model: JointNGramModel, passthrough_penalty: float | None = 8.0
) -> MappingTransducer:
    """Compile a smoothed joint n-gram model into a word transducer.

    Every stored gram becomes a chain of arcs spelling its symbol's source
    tokens against its target tokens (padded with epsilon on the shorter
    side) with the full gram cost on the first arc.  Each context state has
    an epsilon backoff arc to its shortened context and a final cost equal
    to the negative log end-transition probability.  With passthrough
    enabled, the empty context carries a match-anything identity self-loop
    so decoding never dead-ends.
    """
    if passthrough_penalty is not None and passthrough_penalty < 0:
        raise ValueError(
            f"passthrough_penalty must be >= 0, got {passthrough_penalty}"
        )
    contexts = {(): None} | {ctx: None for ctx in model.backoffs}
    context_list = sorted(contexts, key=lambda c: (len(c), _gram_key(c)))
    state_of = {ctx: idx for idx, ctx in enumerate(context_list)}

    grams_by_context: dict[tuple, list] = {ctx: [] for ctx in context_list}
    for gram in model.logprobs:
        sym = gram[-1]
        if sym == EOS:
            continue
        grams_by_context[gram[:-1]].append(sym)
    for syms in grams_by_context.values():
        syms.sort(key=_sym_sort_key)

    vocab_sorted = sorted(model.vocabulary, key=_sym_sort_key)
    isyms = [EPS_LABEL, UNK_LABEL] + sorted(
        {tok for sym in vocab_sorted for tok in sym.source}
    )
    osyms = [EPS_LABEL, UNK_LABEL] + sorted(
        {tok for sym in vocab_sorted for tok in sym.target}
    )
    isym_id = {label: i for i, label in enumerate(isyms)}
    osym_id = {label: i for i, label in enumerate(osyms)}

    arcs: list[list[tuple[int, int, float, int]]] = [
        [] for _ in range(len(context_list))
    ]

    def add_state() -> int:
        arcs.append([])
        return len(arcs) - 1

    max_context = model.order - 1
    for ctx in context_list:
        src_state = state_of[ctx]
        for sym in grams_by_context[ctx]:
            gram = ctx + (sym,)
            logprob10 = model.logprobs[gram]
            if logprob10 > 0.0:
                raise EstimationError(
                    f"gram {gram!r} has positive log-probability "
                    f"{logprob10!r}"
                )
            cost = -logprob10 * LN10
            dest_ctx = gram[-max_context:] if max_context > 0 else ()
            while dest_ctx not in state_of:
                dest_ctx = dest_ctx[1:]
            dest_state = state_of[dest_ctx]
            source, target = sym.source, sym.target
            n_steps = max(len(source), len(target), 1)
            state = src_state
            for step in range(n_steps):
                ilab = isym_id[source[step]] if step < len(source) else EPS_ID
                olab = osym_id[target[step]] if step < len(target) else EPS_ID
                step_cost = cost if step == 0 else 0.0
                dst = dest_state if step == n_steps - 1 else add_state()
                arcs[state].append((ilab, olab, step_cost, dst))
                state = dst
        if ctx:
            backoff10 = model.backoffs[ctx]
            if math.isfinite(backoff10):
                arcs[src_state].append(
                    (EPS_ID, EPS_ID, -backoff10 * LN10, state_of[ctx[1:]])
                )
    if passthrough_penalty is not None:
        empty = state_of[()]
        arcs[empty].append((UNK_ID, UNK_ID, passthrough_penalty, empty))

    finals: dict[int, float] = {}
    for ctx in context_list:
        logprob10 = model.gram_logprob10(ctx, EOS)
        finals[state_of[ctx]] = (
            _FALLBACK_FINAL_COST if logprob10 is None else -logprob10 * LN10
        )

    start_ctx = (BOS,) * max_context
    while start_ctx not in state_of:
        start_ctx = start_ctx[1:]
    return _trim(
        MappingTransducer(
            order=model.order,
            isyms=isyms,
            osyms=osyms,
            arcs=arcs,
            finals=finals,
            start=state_of[start_ctx],
        )
    )


def _gram_key(gram: tuple) -> tuple:
    return tuple(_sym_sort_key(sym) for sym in gram)


def _trim(fst: MappingTransducer) -> MappingTransducer:
    """Drop states unreachable from the start and renumber in BFS order."""
    visit_order: list[int] = [fst.start]
    seen = {fst.start}
    queue = deque(visit_order)
    while queue:
        state = queue.popleft()
        for _, _, _, dst in fst.arcs[state]:
            if dst not in seen:
                seen.add(dst)
                visit_order.append(dst)
                queue.append(dst)
    new_id = {old: new for new, old in enumerate(visit_order)}
    arcs = [
        [
            (ilab, olab, cost, new_id[dst])
            for ilab, olab, cost, dst in fst.arcs[old]
        ]
        for old in visit_order
    ]
    finals = dict(
        sorted(
            (new_id[old], cost)
            for old, cost in fst.finals.items()
            if old in new_id
        )
    )
    return MappingTransducer(
        order=fst.order,
        isyms=fst.isyms,
        osyms=fst.osyms,
        arcs=arcs,
        finals=finals,
        start=0,
    )


def nbest_decode(
    fst: MappingTransducer,
    tokens: tuple[str, ...],
    config: DecodeConfig | None = None,
    utt_id: str = "",
) -> DecodeResult:
    """Uniform-cost search for the cheapest distinct output sequences.

    Search items are recombined on (state, input position, output prefix),
    so the k-th distinct completed output popped is exactly the k-th best.
    Output length is capped at ``4 * len(tokens) + 8`` to bound insertion
    chains.  Raises :class:`NoPathError` when no complete path exists.
    """
    config = config or DecodeConfig()
    index = fst.build_index()
    n_tokens = len(tokens)
    out_cap = 4 * n_tokens + 8
    limit = min(config.output_top_k, config.nbest)
    serial = itertools.count()
    heap: list = []
    best_cost: dict = {}
    done: set = set()
    collected: dict[tuple[str, ...], float] = {}
    best_complete: float | None = None
    max_pos = 0

    def push(cost: float, out: tuple[str, ...], state: int, pos: int) -> None:
        if len(out) > out_cap:
            return
        if best_complete is not None and config.beam is not None:
            if cost > best_complete + config.beam:
                return
        key = (state, pos, out)
        known = best_cost.get(key)
        if known is not None and known <= cost:
            return
        best_cost[key] = cost
        heapq.heappush(heap, (cost, len(out), out, next(serial), state, pos))

    push(0.0, (), fst.start, 0)
    while heap:
        cost, _, out, _, state, pos = heapq.heappop(heap)
        if best_complete is not None and config.beam is not None:
            if cost > best_complete + config.beam:
                break
        if state == _COMPLETE:
            if best_complete is None:
                best_complete = cost
            if out not in collected:
                collected[out] = cost
                if len(collected) >= limit:
                    break
            continue
        key = (state, pos, out)
        if key in done:
            continue
        done.add(key)
        if pos > max_pos:
            max_pos = pos
        if pos == n_tokens and state in fst.finals:
            total = cost + fst.finals[state]
            if best_complete is None or config.beam is None or (
                total <= best_complete + config.beam
            ):
                heapq.heappush(
                    heap, (total, len(out), out, next(serial), _COMPLETE, pos)
                )
        entry = index[state]
        if pos < n_tokens:
            token = tokens[pos]
            ilab = fst.isym_id.get(token)
            if ilab is not None:
                for olab, arc_cost, dst in entry["by_input"].get(ilab, ()):
                    new_out = out if olab == EPS_ID else out + (fst.osyms[olab],)
                    push(cost + arc_cost, new_out, dst, pos + 1)
            if config.passthrough_penalty is not None:
                for olab, _, dst in entry["unk"]:
                    new_out = (
                        out + (token,)
                        if olab == UNK_ID
                        else (out if olab == EPS_ID else out + (fst.osyms[olab],))
                    )
                    push(cost + config.passthrough_penalty, new_out, dst, pos + 1)
        for olab, arc_cost, dst in entry["eps"]:
            new_out = out if olab == EPS_ID else out + (fst.osyms[olab],)
            push(cost + arc_cost, new_out, dst, pos)

    if not collected:
        raise NoPathError(
            f"no complete path for utterance {utt_id!r} "
            f"(consumed {max_pos} of {n_tokens} tokens)",
            matched_prefix=tokens[:max_pos],
        )
    return DecodeResult(
        id=utt_id,
        candidates=tuple(collected.items()),
    )


def apply_corpus(
    fst: MappingTransducer,
    utterances: list[Utterance],
    config: DecodeConfig | None = None,
) -> list[DecodeResult]:
    """Decode every utterance; failures pass the input through unchanged,
    marked with infinite cost and ``failed=True``."""
    config = config or DecodeConfig()
    results: list[DecodeResult] = []
    failures = 0
    for utt in utterances:
        try:
            result = nbest_decode(fst, utt.tokens, config, utt_id=utt.id)
        except NoPathError:
            failures += 1
            result = DecodeResult(
                id=utt.id,
                candidates=((utt.tokens, math.inf),),
                failed=True,
            )
        results.append(result)
    if failures:
        logger.warning(
            "decoding failed for %d of %d utterances (input passed through)",
            failures,
            len(utterances),
        )
    return results


_MAGIC = "T2TFST1"


def write_transducer(fst: MappingTransducer, path: str) -> None:
    """Serialize to the canonical line-oriented text format."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"{_MAGIC}\n")
        fh.write(f"order\t{fst.order}\n")
        fh.write(f"states\t{fst.n_states}\n")
        fh.write(f"start\t{fst.start}\n")
        for i, label in enumerate(fst.isyms):
            fh.write(f"isym\t{i}\t{label}\n")
        for i, label in enumerate(fst.osyms):
            fh.write(f"osym\t{i}\t{label}\n")
        for state, state_arcs in enumerate(fst.arcs):
            for ilab, olab, cost, dst in state_arcs:
                fh.write(
                    f"arc\t{state}\t{dst}\t{fst.isyms[ilab]}\t"
                    f"{fst.osyms[olab]}\t{cost!r}\n"
                )
        for state in sorted(fst.finals):
            fh.write(f"final\t{state}\t{fst.finals[state]!r}\n")


def load_transducer(path: str) -> MappingTransducer:
    """Load a transducer written by :func:`write_transducer`."""

    def fail(lineno: int, message: str):
        raise TransducerFormatError(f"{path}:{lineno}: {message}")

    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().split("\n")
    except OSError as exc:
        raise TransducerFormatError(f"cannot read {path}: {exc}") from None
    if lines and lines[-1] == "":
        lines.pop()
    if not lines or lines[0] != _MAGIC:
        raise TransducerFormatError(
            f"{path}:1: missing {_MAGIC!r} header"
        )

    def scalar(lineno: int, name: str) -> str:
        if lineno - 1 >= len(lines):
            raise TransducerFormatError(f"{path}: truncated before {name!r}")
        cols = lines[lineno - 1].split("\t")
        if len(cols) != 2 or cols[0] != name:
            fail(lineno, f"expected {name!r} line")
        return cols[1]

    try:
        order = int(scalar(2, "order"))
        n_states = int(scalar(3, "states"))
        start = int(scalar(4, "start"))
    except ValueError:
        raise TransducerFormatError(
            f"{path}: bad integer in header lines"
        ) from None
    if order < 1:
        raise TransducerFormatError(f"{path}:2: order must be >= 1")
    if n_states < 1:
        raise TransducerFormatError(f"{path}:3: states must be >= 1")
    if not 0 <= start < n_states:
        raise TransducerFormatError(f"{path}:4: start state out of range")
    isyms: list[str] = []
    osyms: list[str] = []
    isym_map: dict[str, int] = {}
    osym_map: dict[str, int] = {}
    arcs: list[list[tuple[int, int, float, int]]] = [[] for _ in range(n_states)]
    finals: dict[int, float] = {}
    phase = 0  # 0: isym, 1: osym, 2: arc, 3: final
    for lineno, line in enumerate(lines[4:], start=5):
        cols = line.split("\t")
        kind = cols[0]
        if kind == "isym" or kind == "osym":
            expected_phase = 0 if kind == "isym" else 1
            if phase > expected_phase:
                fail(lineno, f"{kind} line out of order")
            phase = expected_phase
            table = isyms if kind == "isym" else osyms
            if len(cols) != 3:
                fail(lineno, f"expected 3 columns in {kind} line")
            try:
                sym_id = int(cols[1])
            except ValueError:
                fail(lineno, f"bad symbol id {cols[1]!r}")
            if sym_id != len(table):
                fail(lineno, "symbol ids must be consecutive from 0")
            mapping = isym_map if kind == "isym" else osym_map
            if cols[2] in mapping:
                fail(lineno, f"duplicate {kind} label {cols[2]!r}")
            mapping[cols[2]] = sym_id
            table.append(cols[2])
        elif kind == "arc":
            if phase > 2:
                fail(lineno, "arc line out of order")
            phase = 2
            if len(cols) != 6:
                fail(lineno, "expected 6 columns in arc line")
            try:
                src = int(cols[1])
                dst = int(cols[2])
                cost = float(cols[5])
            except ValueError:
                fail(lineno, "bad arc numeric field")
            if not 0 <= src < n_states or not 0 <= dst < n_states:
                fail(lineno, "arc state out of range")
            if not math.isfinite(cost):
                fail(lineno, f"arc cost must be finite, got {cols[5]!r}")
            ilab = isym_map.get(cols[3])
            olab = osym_map.get(cols[4])
            if ilab is None:
                fail(lineno, f"unknown input label {cols[3]!r}")
            if olab is None:
                fail(lineno, f"unknown output label {cols[4]!r}")
            arcs[src].append((ilab, olab, cost, dst))
        elif kind == "final":
            phase = 3
            if len(cols) != 3:
                fail(lineno, "expected 3 columns in final line")
            try:
                state = int(cols[1])
                cost = float(cols[2])
            except ValueError:
                fail(lineno, "bad final numeric field")
            if not 0 <= state < n_states:
                fail(lineno, "final state out of range")
            if state in finals:
                fail(lineno, f"duplicate final state {state}")
            finals[state] = cost
        else:
            fail(lineno, f"unknown line kind {kind!r}")
    for table, name in ((isyms, "input"), (osyms, "output")):
        if table[:2] != [EPS_LABEL, UNK_LABEL]:
            raise TransducerFormatError(
                f"{path}: {name} symbol table must start with "
                f"{EPS_LABEL!r}, {UNK_LABEL!r}"
            )
    if not finals:
        raise TransducerFormatError(f"{path}: no final states")
    return MappingTransducer(
        order=order,
        isyms=isyms,
        osyms=osyms,
        arcs=arcs,
        finals=finals,
        start=start,
    )


def write_decode_results(results: list[DecodeResult], path: str) -> None:
    """Write ``id<TAB>rank<TAB>cost<TAB>tokens`` rows, best candidate first."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for result in results:
            for rank, (tokens, cost) in enumerate(result.candidates, start=1):
                fh.write(f"{result.id}\t{rank}\t{cost!r}\t{' '.join(tokens)}\n")


def top_transcripts(results: list[DecodeResult]) -> list[Utterance]:
    """Best output per utterance as transcript rows."""
    return [
        Utterance(id=result.id, tokens=result.candidates[0][0])
        for result in results
    ]
