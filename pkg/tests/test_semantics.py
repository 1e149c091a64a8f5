from hypothesis import given, settings
import hypothesis.strategies as st
import pytest

from piwb import (
    NIL,
    NameUniverse,
    Par,
    UniverseTooSmall,
    alpha_equivalent,
    free_names,
    parse,
    prefix_count,
    substitute,
    transitions,
    weak_transitions,
)
from piwb.syntax import BoundOut, FreeOut, In, TAU_ACT

from conftest import process_pairs, processes


def test_open_rule_single_bound_output():
    p = parse("new z.a!z.0")
    u = NameUniverse.for_terms(p)
    ts = transitions(p, u)
    assert len(ts) == 1
    ((action, target),) = ts
    assert isinstance(action, BoundOut) and action.chan == "a"
    assert target == NIL


def test_close_rule_communication():
    q = parse("new z.(a!z.0) | a?(x).x!a.0")
    u = NameUniverse.for_terms(q)
    taus = [t for a, t in transitions(q, u) if a == TAU_ACT]
    assert len(taus) == 1
    assert alpha_equivalent(taus[0], parse("new z.(0 | z!a.0)"))


def test_input_enumeration_known_plus_one_fresh():
    # Derived by hand from the input rule: with known {a, b} the datum
    # ranges over a, b, and exactly one fresh pool name.
    p = parse("a?(x).0")
    u = NameUniverse(known={"a", "b"}, fresh_pool=("w0", "w1"))
    ts = transitions(p, u)
    assert ts == frozenset({(In("a", "a"), NIL), (In("a", "b"), NIL), (In("a", "w0"), NIL)})


def test_fresh_only_mode_single_instantiation():
    p = parse("a?(x).x!b.0")
    u = NameUniverse(known={"a", "b"}, fresh_pool=("w0",), input_mode="fresh-only")
    ts = transitions(p, u)
    assert len(ts) == 1
    ((action, target),) = ts
    assert action == In("a", "w0")
    assert alpha_equivalent(target, parse("w0!b.0"))


def test_match_blocks_on_distinct_names():
    u = NameUniverse.for_terms(parse("[a=b]tau.0"), extra_known=("a", "b"))
    assert transitions(parse("[a=b]tau.0"), u) == frozenset()
    satisfied = transitions(parse("[a=a]tau.0"), u)
    assert {a for a, _ in satisfied} == {TAU_ACT}


def test_restricted_channel_is_silent():
    p = parse("new z.z!a.0")
    u = NameUniverse.for_terms(p)
    assert transitions(p, u) == frozenset()


def test_comm_datum_not_in_receiver_universe():
    # Communication is structural: the sent datum reaches the receiver
    # even when it is not among the receiver's own instantiation names.
    p = parse("a!c.0 | a?(x).x!b.0")
    u = NameUniverse.for_terms(p)
    taus = [t for a, t in transitions(p, u) if a == TAU_ACT]
    assert len(taus) == 1
    assert alpha_equivalent(taus[0], parse("0 | c!b.0"))


def test_universe_too_small():
    p = parse("a?(x).0")
    u = NameUniverse(known={"a"}, fresh_pool=())
    with pytest.raises(UniverseTooSmall):
        transitions(p, u)


def test_universe_must_cover_free_names():
    u = NameUniverse(known={"a"}, fresh_pool=("w0",))
    with pytest.raises(ValueError):
        transitions(parse("b!a.0"), u)


def test_replication_act():
    p = parse("!a!b.0")
    u = NameUniverse.for_terms(p)
    ts = transitions(p, u)
    assert len(ts) == 1
    ((action, target),) = ts
    assert action == FreeOut("a", "b")
    assert alpha_equivalent(target, parse("0 | !a!b.0"))


def test_replication_comm():
    p = parse("!(a!b.0 + a?(x).x!c.0)")
    u = NameUniverse.for_terms(p)
    taus = [t for a, t in transitions(p, u) if a == TAU_ACT]
    assert any(alpha_equivalent(t, parse("(0 | b!c.0) | !(a!b.0 + a?(x).x!c.0)")) for t in taus)


@given(processes(max_size=6))
@settings(max_examples=60, deadline=None)
def test_transitions_decrease_prefix_count(p):
    u = NameUniverse.for_terms(p)
    n = prefix_count(p)
    for _a, q in transitions(p, u):
        assert prefix_count(q) < n


@given(process_pairs(max_size=5))
@settings(max_examples=40, deadline=None)
def test_parallel_left_closure(pq):
    # Every move of p lifts to a move of p | q with the same label.
    p, q = pq
    par = Par(p, q)
    u = NameUniverse.for_terms(par)
    lifted = transitions(par, u)
    lifted_labels = {a for a, _ in lifted}
    for a, _p2 in transitions(p, u):
        assert a in lifted_labels


@given(processes(max_size=5))
@settings(max_examples=40, deadline=None)
def test_fresh_name_stability(p):
    # Enlarging the known set with an unused name only adds input
    # transitions that mirror the fresh-instantiated ones.
    u = NameUniverse.for_terms(p)
    extra = "zfresh"
    assert extra not in free_names(p)
    u2 = NameUniverse.for_terms(p, extra_known=[extra])
    base = transitions(p, u)
    enlarged = transitions(p, u2)
    fresh0 = u.next_fresh(free_names(p))
    expected = set(base)
    for a, t in base:
        if isinstance(a, In) and a.datum == fresh0:
            expected.add((In(a.chan, extra), substitute(t, extra, fresh0)))
    # The enlarged set may renumber its own fresh instantiation but must
    # contain the base moves plus the mirrored ones.
    assert expected <= set(enlarged)


def test_weak_transitions_tau_prefix():
    p = parse("tau.x!y.0")
    u = NameUniverse.for_terms(p)
    weak = weak_transitions(p, u)
    assert (FreeOut("x", "y"), NIL) in weak.moves


def test_weak_transitions_reflexive_closure():
    u = NameUniverse.for_terms(NIL, extra_known=("a",))
    assert weak_transitions(NIL, u).tau_closure == frozenset({NIL})


def test_weak_transitions_tau_requires_step():
    p = parse("tau.0")
    u = NameUniverse.for_terms(p, extra_known=("a",))
    weak = weak_transitions(p, u)
    assert (TAU_ACT, NIL) in weak.moves
    assert weak.tau_closure == frozenset({p, NIL})
    # 0 itself has no weak tau move: at least one step is required.
    weak0 = weak_transitions(NIL, NameUniverse.for_terms(NIL, extra_known=("a",)))
    assert weak0.moves == frozenset()
