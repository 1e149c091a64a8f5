"""Head normal forms, stuttering detection, and stutter-free normalization.

A head normal form is a sum of prefixed continuations that is strongly
bisimilar to its source term.  Bound-output summands (output of a hidden
name) get their own prefix class since the two-level grammar cannot put a
restriction directly under a sum; `HeadNormalForm.to_process` still
produces the operationally faithful term, which is for equivalence
checking and display rather than re-parsing.

A stuttering transition is an internal step between weakly bisimilar
states.  `stutter_free` rewrites a term into a weakly bisimilar one from
which no stuttering transition is reachable, verifying its own output and
raising NormalizationIncomplete instead of claiming an unverified result.
"""

from __future__ import annotations

from .equivalence import WEAK, refine, weak_bisim
from .errors import NormalizationIncomplete, NotFinite
from .lts import build_lts_multi, depth
from .parser import _render
from .semantics import NameUniverse, _resolve_prefix
from .syntax import (
    Input,
    Nil,
    NIL,
    Output,
    Par,
    Prefixed,
    Process,
    Repl,
    Restrict,
    Sum,
    TAU,
    TAU_ACT,
    Tau,
    alpha_canonical,
    bound_names,
    free_names,
    is_replication_free,
    substitute,
)


class BoundOutputPrefix:
    """Output of the private name `binder` on `chan`; binds the continuation."""

    __slots__ = ("chan", "binder", "_hash")

    def __init__(self, chan, binder):
        object.__setattr__(self, "chan", chan)
        object.__setattr__(self, "binder", binder)
        object.__setattr__(self, "_hash", hash(("bout-prefix", chan, binder)))

    def __eq__(self, other):
        return (
            type(other) is BoundOutputPrefix
            and self.chan == other.chan
            and self.binder == other.binder
        )

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"BoundOutputPrefix({self.chan!r}, {self.binder!r})"


class HeadNormalForm:
    """Sum of guarded continuations, strongly bisimilar to the source term."""

    __slots__ = ("summands",)

    def __init__(self, summands):
        self.summands = tuple(summands)

    def __len__(self):
        return len(self.summands)

    def __iter__(self):
        return iter(self.summands)

    def to_process(self) -> Process:
        """Fold the summands back into one term.

        Bound-output summands become restriction-wrapped outputs, which is
        operationally the same behaviour but, inside a sum, falls outside
        the two-level grammar; use the result for semantics, not parsing.
        """
        parts = []
        for guard, cont in self.summands:
            if isinstance(guard, BoundOutputPrefix):
                parts.append(
                    Restrict(guard.binder, Prefixed(Output(guard.chan, guard.binder), cont))
                )
            else:
                parts.append(Prefixed(guard, cont))
        if not parts:
            return NIL
        term = parts[0]
        for part in parts[1:]:
            term = Sum(term, part)
        return term


def _hnf(t: Process):
    if isinstance(t, Nil):
        return []
    if isinstance(t, Prefixed):
        core = _resolve_prefix(t.prefix)
        if core is None:
            return []
        return [(core, t.cont)]
    if isinstance(t, Sum):
        return _hnf(t.left) + _hnf(t.right)
    if isinstance(t, Par):
        left = _hnf(t.left)
        right = _hnf(t.right)
        out = [(g, Par(cont, t.right)) for g, cont in left]
        out += [(g, Par(t.left, cont)) for g, cont in right]
        out += _hnf_comm(left, right)
        out += _hnf_comm(right, left)
        return out
    if isinstance(t, Restrict):
        z = t.binder
        out = []
        for g, cont in _hnf(t.body):
            if isinstance(g, Output):
                if g.chan == z:
                    continue
                if g.datum == z:
                    out.append((BoundOutputPrefix(g.chan, z), cont))
                else:
                    out.append((g, Restrict(z, cont)))
            elif isinstance(g, (Input, BoundOutputPrefix)):
                if g.chan == z:
                    continue
                out.append((g, Restrict(z, cont)))
            else:
                out.append((g, Restrict(z, cont)))
        return out
    if isinstance(t, Repl):
        raise NotFinite("head normal form requires a replication-free term")
    raise TypeError(f"not a process: {t!r}")


def _hnf_comm(senders, receivers):
    """Tau summands for communications from `senders` into `receivers`."""
    out = []
    for g, cont in senders:
        if isinstance(g, Output):
            for g2, cont2 in receivers:
                if isinstance(g2, Input) and g2.chan == g.chan:
                    merged = Par(cont, substitute(cont2, g.datum, g2.binder))
                    out.append((TAU, merged))
        elif isinstance(g, BoundOutputPrefix):
            for g2, cont2 in receivers:
                if isinstance(g2, Input) and g2.chan == g.chan:
                    merged = Par(cont, substitute(cont2, g.binder, g2.binder))
                    out.append((TAU, Restrict(g.binder, merged)))
    return out


def expand_hnf(p: Process) -> HeadNormalForm:
    """Expansion-law head normal form of a replication-free term.

    The input is alpha-canonicalized first so all binders are mutually
    distinct and disjoint from the free names, which discharges every
    freshness side condition of the expansion.
    """
    if not is_replication_free(p):
        raise NotFinite("head normal form requires a replication-free term")
    return HeadNormalForm(_hnf(alpha_canonical(p)))


# --------------------------------------------------------------------------
# Stuttering


def has_stuttering(p: Process, u: NameUniverse | None = None):
    """Is some internal step between weakly bisimilar states reachable?

    Returns (verdict, witness) where the witness is the offending pair of
    terms (source, target of the stuttering step), or None.
    """
    if not is_replication_free(p):
        raise NotFinite("stuttering detection requires a replication-free term")
    if u is None:
        u = NameUniverse.for_terms(p)
    l = build_lts_multi([p], u)
    part = refine(l, WEAK)
    for i in range(len(l.states)):
        for a, j in l.edges_from[i]:
            if a == TAU_ACT and part.same_block(i, j):
                return True, (l.states[i], l.states[j])
    return False, None


def _witness_json(witness):
    if witness is None:
        return None
    return {"state": _render(witness[0], 0), "successor": _render(witness[1], 0)}


def stutter_free(p: Process, u: NameUniverse | None = None):
    """Weakly bisimilar, stuttering-free normal form of `p`, with a report.

    Construction: terms without reachable stuttering are kept as they are
    (preserving parallel structure); parallel compositions and restrictions
    are normalized componentwise and rechecked; otherwise the term is
    expanded to head normal form -- an internal summand whose continuation
    is weakly bisimilar to the whole term replaces it (depth strictly
    decreases), and otherwise every continuation is normalized in place.

    The result is verified: it must be weakly bisimilar to the input and
    itself free of reachable stuttering.  On verification failure the
    report and residual witness travel in NormalizationIncomplete rather
    than being silently accepted.
    """
    if not is_replication_free(p):
        raise NotFinite("stutter-free normalization requires a replication-free term")
    if u is None:
        u = NameUniverse.for_terms(p)
    # Binder names may surface as free names of subterms during the
    # recursion; widen the universe once so every inner check aligns.
    work = u.extended(bound_names(p))
    memo: dict[Process, Process] = {}
    stutter_memo: dict[Process, bool] = {}

    def stutters(t):
        got = stutter_memo.get(t)
        if got is None:
            got = has_stuttering(t, work.extended(free_names(t)))[0]
            stutter_memo[t] = got
        return got

    def norm(t):
        t = alpha_canonical(t, avoid=work.all_names)
        got = memo.get(t)
        if got is not None:
            return got
        result = _norm_uncached(t)
        memo[t] = result
        return result

    def _norm_uncached(t):
        if not stutters(t):
            return t
        if isinstance(t, Par):
            merged = Par(norm(t.left), norm(t.right))
            if not stutters(merged):
                return merged
            t = merged
        elif isinstance(t, Restrict):
            merged = Restrict(t.binder, norm(t.body))
            if not stutters(merged):
                return merged
            t = merged
        summands = _hnf(alpha_canonical(t, avoid=work.all_names))
        for guard, cont in summands:
            if isinstance(guard, Tau):
                inner = work.extended(free_names(cont) | free_names(t))
                if weak_bisim(cont, t, inner)[0]:
                    return norm(cont)
        return HeadNormalForm(
            [(guard, norm(cont)) for guard, cont in summands]
        ).to_process()

    result = norm(p)
    equivalent = weak_bisim(result, p, work)[0]
    still, witness = has_stuttering(result, work)
    report = {
        "equivalent-to-input": equivalent,
        "stutter-free": not still,
    }
    if witness is not None:
        report["witness"] = _witness_json(witness)
    if equivalent and not still:
        return result, report
    raise NormalizationIncomplete(
        "stutter-free normalization could not be verified",
        report=report,
        witness=witness,
    )


def weak_depth(p: Process, u: NameUniverse | None = None) -> int:
    """Depth of the stutter-free representative of `p`'s weak class."""
    if u is None:
        u = NameUniverse.for_terms(p)
    representative, _report = stutter_free(p, u)
    return depth(build_lts_multi([representative], u))
