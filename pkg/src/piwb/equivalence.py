"""Strong and weak bisimilarity checking with witness partitions.

The main procedure is signature-based partition refinement over the
disjoint-union transition graph of the two terms, built under one shared
name universe so input instantiations align.  Weak mode refines over the
saturated graph: visible challenges may be answered through internal
steps, and a tau challenge may be answered by staying put.

`naive_bisim_oracle` is an intentionally separate decision procedure
(greatest-fixpoint shrinking of the full state-pair relation) used to
cross-check the refinement implementation.
"""

from __future__ import annotations

from .errors import NotFinite, TooLarge
from .lts import Lts, build_lts_multi
from .semantics import NameUniverse, _steps_cached, state_for
from .syntax import (
    Process,
    TAU_ACT,
    is_replication_free,
)

STRONG = "strong"
WEAK = "weak"


class Partition:
    """Disjoint blocks of LTS states whose induced relation is a bisimulation."""

    __slots__ = ("lts", "mode", "blocks", "_block_of")

    def __init__(self, lts: Lts, mode: str, block_ids: list[int]):
        self.lts = lts
        self.mode = mode
        groups: dict[int, list[int]] = {}
        for state, b in enumerate(block_ids):
            groups.setdefault(b, []).append(state)
        ordered = sorted(groups.values(), key=lambda states: states[0])
        self.blocks = tuple(frozenset(states) for states in ordered)
        lookup = {}
        for bid, states in enumerate(ordered):
            for s in states:
                lookup[s] = bid
        self._block_of = lookup

    def block_of(self, state: int) -> int:
        return self._block_of[state]

    def same_block(self, s: int, t: int) -> bool:
        return self._block_of[s] == self._block_of[t]

    def to_json_dict(self) -> dict:
        return {
            "mode": self.mode,
            "blocks": [
                sorted(self.lts.state_text(s) for s in block)
                for block in self.blocks
            ],
        }


def _saturate(l: Lts):
    """Per-state weak answers: tau closures and visible weak successors."""
    n = len(l.states)
    closure: list[frozenset | None] = [None] * n

    def clo(i: int) -> frozenset:
        got = closure[i]
        if got is None:
            acc = {i}
            for a, j in l.edges_from[i]:
                if a == TAU_ACT:
                    acc |= clo(j)
            got = frozenset(acc)
            closure[i] = got
        return got

    vis: list[frozenset] = []
    for i in range(n):
        acc = set()
        for s in clo(i):
            for a, j in l.edges_from[s]:
                if a != TAU_ACT:
                    acc.update((a, t) for t in clo(j))
        vis.append(frozenset(acc))
    return [clo(i) for i in range(n)], vis


def refine(l: Lts, mode: str) -> Partition:
    """Coarsest partition closed under (strong or weak) signature splitting."""
    n = len(l.states)
    block = [0] * n
    if mode == WEAK:
        tau_clo, vis = _saturate(l)

        def signature(i):
            sig = {(a, block[j]) for a, j in vis[i]}
            sig.update((TAU_ACT, block[j]) for j in tau_clo[i])
            return frozenset(sig)

    elif mode == STRONG:

        def signature(i):
            return frozenset((a, block[j]) for a, j in l.edges_from[i])

    else:
        raise ValueError(f"unknown mode: {mode!r}")

    while True:
        buckets: dict = {}
        next_block = [0] * n
        for i in range(n):
            key = (block[i], signature(i))
            bid = buckets.get(key)
            if bid is None:
                bid = len(buckets)
                buckets[key] = bid
            next_block[i] = bid
        if len(buckets) == len(set(block)):
            return Partition(l, mode, block)
        block = next_block


def _union_lts(p: Process, q: Process, u: NameUniverse | None, mode_hint=None):
    if not (is_replication_free(p) and is_replication_free(q)):
        raise NotFinite("bisimilarity checking requires replication-free terms")
    if u is None:
        u = NameUniverse.for_terms(p, q)
    return build_lts_multi([p, q], u)


def strong_bisim(
    p: Process, q: Process, u: NameUniverse | None = None
) -> tuple[bool, Partition]:
    """Decide p ~ q; the partition witnesses the verdict on the union graph."""
    l = _union_lts(p, q, u)
    part = refine(l, STRONG)
    return part.same_block(l.roots[0], l.roots[1]), part


def weak_bisim(
    p: Process, q: Process, u: NameUniverse | None = None
) -> tuple[bool, Partition]:
    """Decide p ~~ q (weak bisimilarity), tau challenges answerable in place."""
    l = _union_lts(p, q, u)
    part = refine(l, WEAK)
    return part.same_block(l.roots[0], l.roots[1]), part


def bisim(p: Process, q: Process, mode: str, u: NameUniverse | None = None):
    if mode == STRONG:
        return strong_bisim(p, q, u)
    if mode == WEAK:
        return weak_bisim(p, q, u)
    raise ValueError(f"unknown mode: {mode!r}")


def naive_bisim_oracle(
    p: Process,
    q: Process,
    mode: str = STRONG,
    u: NameUniverse | None = None,
    max_pairs: int = 250_000,
) -> bool:
    """Independent oracle: shrink the full state-pair relation to a fixpoint.

    Quadratic in states and meant for small instances only; raises TooLarge
    beyond `max_pairs` candidate pairs.
    """
    if mode not in (STRONG, WEAK):
        raise ValueError(f"unknown mode: {mode!r}")
    l = _union_lts(p, q, u)
    n = len(l.states)
    if n * n > max_pairs:
        raise TooLarge(f"{n * n} state pairs exceed the configured bound {max_pairs}")

    if mode == STRONG:
        answers = [frozenset(l.edges_from[i]) for i in range(n)]

        def challenges(i):
            return l.edges_from[i]

    else:
        # Local saturation, kept separate from refine()'s on purpose.
        closure: list[set] = [None] * n  # type: ignore[list-item]

        def clo(i):
            if closure[i] is None:
                acc = {i}
                for a, j in l.edges_from[i]:
                    if a == TAU_ACT:
                        acc |= clo(j)
                closure[i] = acc
            return closure[i]

        answers = []
        for i in range(n):
            acc = {(TAU_ACT, t) for t in clo(i)}
            for s in clo(i):
                for a, j in l.edges_from[s]:
                    if a != TAU_ACT:
                        acc.update((a, t) for t in clo(j))
            answers.append(frozenset(acc))

        def challenges(i):
            return l.edges_from[i]

    related = [[True] * n for _ in range(n)]
    changed = True
    while changed:
        changed = False
        for i in range(n):
            row = related[i]
            for j in range(n):
                if not row[j]:
                    continue
                ok = _matches(challenges(i), answers[j], related, False) and _matches(
                    challenges(j), answers[i], related, True
                )
                if not ok:
                    row[j] = False
                    changed = True
    return related[l.roots[0]][l.roots[1]]


def _matches(challenge_edges, answer_set, related, flipped):
    for a, i2 in challenge_edges:
        found = False
        for b, j2 in answer_set:
            if b == a and (related[j2][i2] if flipped else related[i2][j2]):
                found = True
                break
        if not found:
            return False
    return True


def bisimilar_to_nil(p: Process, mode: str, u: NameUniverse | None = None) -> bool:
    """Strong: no transitions at all.  Weak: no visible action ever reachable."""
    if not is_replication_free(p):
        raise NotFinite("requires a replication-free term")
    if u is None:
        u = NameUniverse.for_terms(p)
    if mode == STRONG:
        return not _steps_cached(state_for(p, u), u)
    if mode == WEAK:
        l = build_lts_multi([p], u)
        return all(a == TAU_ACT for _, a, _ in l.edges())
    raise ValueError(f"unknown mode: {mode!r}")
