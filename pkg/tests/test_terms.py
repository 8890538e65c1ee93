import pytest
from hypothesis import given, strategies as st

from coreach.errors import InvalidPosition
from coreach.signature import Signature
from coreach.terms import (
    INT,
    FreshCounter,
    Lit,
    Substitution,
    Var,
    non_variable_positions,
    positions,
    renaming_for,
    replace_at,
    subterm_at,
    term_vars,
)

sig = Signature()
CFG = sig.add_sort("Cfg")
sig.add_operation("init", [INT], CFG)
sig.add_operation("loop", [INT, INT], CFG)
sig.add_operation("comp", [], CFG)

n, i, k = Var("n", INT), Var("i", INT), Var("k", INT)
mk = sig.make_app


def ints(lo=-5, hi=5):
    return st.integers(lo, hi).map(Lit)


def leaves():
    return st.one_of(ints(), st.sampled_from([n, i, k]))


def int_terms(depth=3):
    base = leaves()
    if depth == 0:
        return base
    sub = int_terms(depth - 1)
    return st.one_of(
        base,
        st.tuples(st.sampled_from(["+", "-", "*"]), sub, sub).map(lambda t: mk(t[0], (t[1], t[2]))),
    )


def cfg_terms():
    return st.one_of(
        int_terms(2).map(lambda t: mk("init", (t,))),
        st.tuples(int_terms(2), int_terms(2)).map(lambda t: mk("loop", t)),
        st.just(mk("comp", ())),
    )


def test_apply_substitution_binds_and_leaves_rest():
    s = Substitution({n: Lit(4)})
    assert s.apply(mk("loop", (n, Lit(2)))) == mk("loop", (Lit(4), Lit(2)))
    t = mk("loop", (i, k))
    assert s.apply(t) == t


def test_identity_substitution_is_identity():
    t = mk("init", (mk("*", (i, k)),))
    assert Substitution({}).apply(t) == t


def test_substitution_into_term():
    s = Substitution({n: mk("*", (i, k))})
    assert s.apply(mk("init", (n,))) == mk("init", (mk("*", (i, k)),))


@given(cfg_terms(), int_terms(2), int_terms(2))
def test_substitution_composition(t, a, b):
    tau = Substitution({n: a})
    sigma = Substitution({i: b})
    composed = sigma.compose(tau)
    assert composed.apply(t) == sigma.apply(tau.apply(t))


def test_non_variable_positions_examples():
    assert non_variable_positions(mk("loop", (n, Lit(2)))) == [(), (2,)]
    assert non_variable_positions(mk("comp", ())) == [()]
    t = mk("loop", (mk("*", (i, k)), i))
    assert non_variable_positions(t) == [(), (1,)]


def test_replace_at_top_and_child():
    assert replace_at(mk("init", (n,)), (), mk("loop", (n, Lit(2)))) == mk("loop", (n, Lit(2)))
    got = replace_at(mk("loop", (n, Lit(2))), (2,), mk("+", (i, Lit(1))))
    assert got == mk("loop", (n, mk("+", (i, Lit(1)))))


def test_replace_at_invalid_position():
    with pytest.raises(InvalidPosition):
        replace_at(mk("comp", ()), (1,), n)


@given(cfg_terms())
def test_replace_at_roundtrip(t):
    for p in positions(t):
        assert replace_at(t, p, subterm_at(t, p)) == t


def test_rename_fresh_disjoint_and_shape_preserving():
    ctr = FreshCounter()
    t = mk("loop", (n, i))
    r1 = renaming_for(term_vars(t), ctr)
    r2 = renaming_for(term_vars(t), ctr)
    t1, t2 = r1.apply(t), r2.apply(t)
    assert term_vars(t1) & term_vars(t2) == set()
    assert term_vars(t1) & term_vars(t) == set()
    assert sig.least_sort(t1) == sig.least_sort(t)
    # renaming is a bijection: distinct images, same count
    assert len(term_vars(t1)) == len(term_vars(t))


def test_rename_fresh_no_variables_advances_nothing():
    ctr = FreshCounter()
    r = renaming_for(set(), ctr)
    assert not r.mapping
    assert ctr.next_index == 0


@given(cfg_terms(), int_terms(2))
def test_free_vars_of_substituted_term(t, a):
    sigma = Substitution({n: a})
    expected = (term_vars(t) - {n}) | (term_vars(a) if n in term_vars(t) else set())
    assert term_vars(sigma.apply(t)) == expected
