import hypothesis.strategies as st

from piwb.gen import TermGen


@st.composite
def processes(draw, max_size=8, names=("a", "b", "c"), **kwargs):
    seed = draw(st.integers(0, 2**32 - 1))
    size = draw(st.integers(1, max_size))
    return TermGen(seed, names, **kwargs).term(size)


@st.composite
def process_pairs(draw, max_size=6, names=("a", "b", "c"), **kwargs):
    """Two terms with mutually disjoint binders, per the freshness convention."""
    seed = draw(st.integers(0, 2**32 - 1))
    size = draw(st.integers(1, max_size))
    gen = TermGen(seed, names, **kwargs)
    return gen.term(size), gen.term(size)
