from hypothesis import given
import hypothesis.strategies as st
import pytest

from piwb import (
    MalformedSum,
    NIL,
    Par,
    Prefixed,
    Sum,
    alpha_canonical,
    alpha_equivalent,
    bound_names,
    free_names,
    is_replication_free,
    names,
    parse,
    substitute,
    validate,
)
from piwb.syntax import Input, Output, Restrict, subterms

from conftest import processes


def test_free_names_nil():
    assert free_names(NIL) == frozenset()


def test_free_names_restriction_hides_binder():
    assert free_names(parse("new z.x!z.0")) == {"x"}


def test_free_names_stutter_example():
    # a(x).(x!b + tau.c!b) mentions a, b, c freely; x is bound.
    p = parse("a?(x).(x!b.0 + tau.c!b.0)")
    assert free_names(p) == {"a", "b", "c"}


def test_names_is_union_of_free_and_bound():
    p = parse("new z.(a?(x).x!z.0 | b!c.0)")
    assert names(p) == free_names(p) | bound_names(p)
    assert bound_names(p) == {"z", "x"}


def _occurrence_oracle(p):
    """Single-pass scope-tracking walk, independent of free_names/bound_names."""
    free, bound = set(), set()

    def visit_prefix(pi, scope):
        from piwb.syntax import Input, Match, Output

        while isinstance(pi, Match):
            for n in (pi.lhs, pi.rhs):
                (bound if n in scope else free).add(n)
            pi = pi.inner
        if isinstance(pi, Output):
            for n in (pi.chan, pi.datum):
                (bound if n in scope else free).add(n)
            return None
        if isinstance(pi, Input):
            (bound if pi.chan in scope else free).add(pi.chan)
            bound.add(pi.binder)
            return pi.binder
        return None

    def visit(t, scope):
        from piwb.syntax import Nil, Par, Prefixed, Repl, Restrict, Sum

        if isinstance(t, Nil):
            return
        if isinstance(t, Prefixed):
            binder = visit_prefix(t.prefix, scope)
            visit(t.cont, scope | {binder} if binder else scope)
        elif isinstance(t, (Sum, Par)):
            visit(t.left, scope)
            visit(t.right, scope)
        elif isinstance(t, Restrict):
            bound.add(t.binder)
            visit(t.body, scope | {t.binder})
        elif isinstance(t, Repl):
            visit(t.body, scope)

    visit(p, frozenset())
    return free, bound


@given(processes())
def test_name_sets_against_occurrence_oracle(p):
    free, bound = _occurrence_oracle(p)
    # A name can be both free and bound (different occurrences); free_names
    # must report exactly the ones with an unbound occurrence.
    assert free_names(p) == frozenset(free)
    assert names(p) == frozenset(free) | bound_names(p)


def test_substitute_noncongruence_example():
    p = parse("z!x.0 | a?(y).0")
    assert alpha_equivalent(substitute(p, "a", "z"), parse("a!x.0 | a?(y).0"))


@given(processes())
def test_substitute_identity(p):
    for n in sorted(free_names(p)) or ["a"]:
        assert alpha_equivalent(substitute(p, n, n), p)


def test_substitute_capture_avoidance():
    # new a.(a!z.0) {a/z}: the binder must be renamed, not capture.
    p = Restrict("a", Prefixed(Output("a", "z"), NIL))
    q = substitute(p, "a", "z")
    assert free_names(q) == {"a"}
    # The restricted channel is still distinct from the new free datum.
    assert q.binder != "a"
    assert q.body.prefix.datum == "a"


@given(processes(), st.sampled_from(["a", "b", "c", "d"]))
def test_substitute_free_name_law(p, new):
    for old in sorted(free_names(p)):
        expected = (free_names(p) - {old}) | {new}
        assert free_names(substitute(p, new, old)) == expected


def test_substitute_absent_name_is_identity():
    p = parse("a!b.0")
    assert substitute(p, "x", "q") is p


def test_alpha_canonical_identifies_variants():
    assert alpha_canonical(parse("new z.z!a.0")) == alpha_canonical(parse("new w.w!a.0"))


def test_alpha_canonical_renames_input_binder():
    p = alpha_canonical(parse("a?(x).x!b.0"))
    assert p.prefix.binder == "v0"
    assert free_names(p) == {"a", "b"}


@given(processes())
def test_alpha_canonical_idempotent(p):
    c = alpha_canonical(p)
    assert alpha_canonical(c) == c


@given(processes())
def test_alpha_canonical_preserves_free_names(p):
    assert free_names(alpha_canonical(p)) == free_names(p)


def test_alpha_canonical_skips_colliding_indices():
    # v0 occurs free, so the binder allocator must not reuse it.
    p = parse("new z.z!v0.0")
    c = alpha_canonical(p)
    assert c.binder != "v0"
    assert free_names(c) == {"v0"}


def test_is_replication_free_examples():
    assert is_replication_free(parse("new z.(a!z.0) | a?(x).x!a.0"))
    assert not is_replication_free(parse("new z.(a!z.0) | a?(x).!x!a.0"))
    assert is_replication_free(NIL)


def test_validate_rejects_parallel_under_sum():
    bad = Sum(Par(NIL, NIL), NIL)
    with pytest.raises(MalformedSum):
        validate(bad)


def test_validate_accepts_sum_of_prefixes():
    validate(parse("z!x.a?(y).0 + a?(y).z!x.0"))
    validate(NIL)


@given(processes())
def test_generated_terms_validate(p):
    validate(p)


@given(processes())
def test_generated_terms_replication_free(p):
    assert is_replication_free(p)


@given(processes())
def test_generator_respects_freshness_convention(p):
    # every binder is distinct from every other binder and free name
    binders = []
    for t in subterms(p):
        if isinstance(t, Restrict):
            binders.append(t.binder)
        if isinstance(t, Prefixed):
            pi = t.prefix
            from piwb.syntax import Match

            while isinstance(pi, Match):
                pi = pi.inner
            if isinstance(pi, Input):
                binders.append(pi.binder)
    assert len(binders) == len(set(binders))
    assert not (set(binders) & free_names(p))
