import pytest

from coreach.errors import IllTyped, UnknownSort
from coreach.signature import Signature, validate_signature
from coreach.terms import BOOL, INT, Lit, Sort, Var


def test_example_signature_is_admitted(comp_sig):
    assert validate_signature(comp_sig) == []


def test_builtin_overlap_is_reported():
    sig = Signature()
    cfg = sig.add_sort("Cfg")
    sig.add_operation("+", [INT, INT], cfg)
    kinds = {v.kind for v in sig.validate()}
    assert "builtin-overlap" in kinds


def test_monotonicity_violation_with_subsort():
    sig = Signature()
    cfg = sig.add_sort("Cfg")
    nat = sig.add_sort("Nat")
    sig.add_subsort("Nat", "Int")
    sig.add_operation("f", [nat], cfg)
    sig.add_operation("f", [INT], BOOL)
    kinds = {v.kind for v in sig.validate()}
    assert "monotonicity" in kinds


def test_uninhabited_sort_is_reported():
    sig = Signature()
    sig.add_sort("Empty")
    kinds = {v.kind for v in sig.validate()}
    assert "uninhabited" in kinds


def test_constructor_into_builtin_sort_is_reported():
    sig = Signature()
    sig.add_sort("Cfg")
    sig.add_operation("weird", [], INT)
    kinds = {v.kind for v in sig.validate()}
    assert "builtin-result" in kinds


def test_least_sort_examples(comp_sig):
    mk = comp_sig.make_app
    assert comp_sig.least_sort(mk("init", (Lit(3),))).name == "Cfg"
    assert comp_sig.least_sort(Lit(3)) == INT


def test_least_sort_picks_smaller_overload():
    sig = Signature()
    nat = sig.add_sort("Nat")
    sig.add_subsort("Nat", "Int")
    sig.add_operation("zero", [], nat)
    sig.add_operation("succ", [nat], nat)
    sig.add_operation("succ", [INT], INT)
    # ls(succ(x:Nat)) refines through the Nat overload
    x = Var("x", nat)
    assert sig.least_sort(sig.make_app("succ", (x,))) == nat
    assert sig.least_sort(sig.make_app("succ", (Lit(1),))) == INT


def test_least_sort_rejects_unknown_application(comp_sig):
    with pytest.raises(IllTyped):
        comp_sig.make_app("init", (comp_sig.make_app("comp", ()),))


def test_is_subsort_reflexive_and_declared():
    sig = Signature()
    nat = sig.add_sort("Nat")
    sig.add_subsort("Nat", "Int")
    assert sig.is_subsort(INT, INT)
    assert sig.is_subsort(nat, INT)
    assert not sig.is_subsort(INT, nat)


def test_is_subsort_empty_relation(comp_sig):
    cfg = comp_sig.sorts["Cfg"]
    assert not comp_sig.is_subsort(cfg, INT)
    assert not comp_sig.is_subsort(INT, cfg)


def test_is_subsort_transitive():
    sig = Signature()
    a, b, c = (sig.add_sort(x) for x in "ABC")
    sig.add_subsort("A", "B")
    sig.add_subsort("B", "C")
    sig.add_operation("mkA", [], a)
    assert sig.is_subsort(a, c)
    assert not sig.is_subsort(c, a)  # antisymmetry on distinct sorts


def test_is_subsort_unknown_sort_raises(comp_sig):
    with pytest.raises(UnknownSort):
        comp_sig.is_subsort(Sort("Ghost"), INT)


def test_corpus_signatures_validate():
    from pathlib import Path

    from coreach.specfile import parse_spec

    for path in sorted(Path("systems").glob("*.lrw")):
        spec = parse_spec(path.read_text())
        assert spec.signature.validate() == [], path.name


def test_least_sort_is_minimal_over_memberships():
    # independent membership: t inhabits sort s iff some overload chain fits
    sig = Signature()
    nat = sig.add_sort("Nat")
    cfg = sig.add_sort("Cfg")
    sig.add_subsort("Nat", "Int")
    sig.add_operation("zero", [], nat)
    sig.add_operation("succ", [nat], nat)
    sig.add_operation("succ", [INT], INT)
    sig.add_operation("box", [INT], cfg)

    def member(t, s):
        if isinstance(t, (Var, Lit)):
            return sig.is_subsort(t.sort, s)
        return any(
            sig.is_subsort(op.result, s)
            and len(op.arg_sorts) == len(t.args)
            and all(member(a, w) for a, w in zip(t.args, op.arg_sorts))
            for op in sig.overloads(t.symbol)
        )

    x = Var("x", nat)
    terms = [Lit(1), x, sig.make_app("zero", ())]
    for _ in range(2):  # grow to depth 3
        terms += [sig.make_app("succ", (t,)) for t in terms if sig.least_sort(t).name in ("Nat", "Int")]
    terms += [sig.make_app("box", (t,)) for t in terms if sig.least_sort(t).name in ("Nat", "Int")]
    for t in terms:
        ls = sig.least_sort(t)
        for s in sig.sorts.values():
            if member(t, s):
                assert sig.is_subsort(ls, s), (t, s)
        assert member(t, ls)
