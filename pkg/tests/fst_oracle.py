"""Brute-force decoding oracle over random acyclic transducers.

Shared by the transducer unit tests and the acceptance suite.  Machines are
built with arcs that only move to higher-numbered states, so exhaustive path
enumeration terminates; arc and final costs are dyadic rationals (k/8) so
floating-point sums are exact and result comparison needs no tolerance.
"""

from __future__ import annotations

import random

from t2tmap import MappingTransducer
from t2tmap.transducer import EPS_ID

VOCAB = ("a", "b", "c")


def random_machine(
    rng: random.Random,
    max_states: int = 7,
    arc_range: tuple[int, int] = (1, 4),
) -> MappingTransducer:
    n_states = rng.randint(3, max_states)
    isyms = ["<eps>", "<unk>", *VOCAB]
    arcs: list[list[tuple[int, int, float, int]]] = [[] for _ in range(n_states)]
    for src in range(n_states - 1):
        for _ in range(rng.randint(*arc_range)):
            dst = rng.randint(src + 1, n_states - 1)
            ilab = rng.choice([0, 2, 3, 4])  # eps or a vocabulary token
            olab = rng.choice([0, 2, 3, 4])
            cost = rng.randint(0, 40) / 8
            arcs[src].append((ilab, olab, cost, dst))
    finals = {n_states - 1: rng.randint(0, 40) / 8}
    for state in range(n_states - 1):
        if rng.random() < 0.3:
            finals[state] = rng.randint(0, 40) / 8
    return MappingTransducer(
        order=2,
        isyms=isyms,
        osyms=list(isyms),
        arcs=arcs,
        finals=finals,
        start=0,
    )


def enumerate_outputs(
    fst: MappingTransducer, tokens: tuple[str, ...]
) -> dict[tuple[str, ...], float]:
    """Minimum completion cost of every reachable output, by full DFS."""
    best: dict[tuple[str, ...], float] = {}

    def visit(state: int, pos: int, out: tuple[str, ...], cost: float) -> None:
        if pos == len(tokens) and state in fst.finals:
            total = cost + fst.finals[state]
            if out not in best or total < best[out]:
                best[out] = total
        for ilab, olab, arc_cost, dst in fst.arcs[state]:
            emitted = out if olab == EPS_ID else out + (fst.osyms[olab],)
            if ilab == EPS_ID:
                visit(dst, pos, emitted, cost + arc_cost)
            elif pos < len(tokens) and fst.isyms[ilab] == tokens[pos]:
                visit(dst, pos + 1, emitted, cost + arc_cost)

    visit(fst.start, 0, (), 0.0)
    return best


def expected_candidates(
    fst: MappingTransducer, tokens: tuple[str, ...], limit: int
) -> tuple[tuple[tuple[str, ...], float], ...]:
    """The decoder's contract: distinct outputs by (cost, length, tokens)."""
    best = enumerate_outputs(fst, tokens)
    ranked = sorted(best.items(), key=lambda kv: (kv[1], len(kv[0]), kv[0]))
    return tuple(ranked[:limit])
