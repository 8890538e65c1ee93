"""Rule applications, guardedness, search behavior, and proof audits."""

import pytest

from coreach.errors import GuardednessViolation, InvalidSplit
from coreach.formulas import (
    Atom,
    ConstrainedTerm,
    Eq,
    FALSE,
    FalseF,
    Not,
    TRUE,
    conj,
)
from coreach.prover import (
    AXIOM,
    CIRC,
    DER,
    FAILED,
    Goal,
    PROVED,
    ProofNode,
    Prover,
    SUBS,
    SearchConfig,
    audit_structure,
    check_guarded,
    render_json,
    render_text,
    reverify,
    to_json_dict,
)
from coreach.rewriting import ReachabilityFormula
from coreach.terms import INT, Lit, Var

n, i, x, y = Var("n", INT), Var("i", INT), Var("x", INT), Var("y", INT)


@pytest.fixture()
def prover(comp_system, comp_goals, solver_cfg):
    return Prover(comp_system, comp_goals, SearchConfig(max_der_depth=10, solver=solver_cfg))


def goal_of(rf, **kw):
    return Goal(rf, **kw)


def test_axiom_closes_false_constraint(prover, comp_sig, comp_goals):
    mk = comp_sig.make_app
    rf = ReachabilityFormula(ConstrainedTerm(mk("comp", ()), FALSE), comp_goals[0].rhs)
    node = prover.apply_axiom(goal_of(rf))
    assert node is not None and node.kind == AXIOM and not node.children


def test_axiom_closes_unsatisfiable_residual(prover, comp_sig, comp_goals):
    # divisor in [i, n) but none in [i+1, n) while i itself does not divide n
    from coreach.formulas import Exists

    mk = comp_sig.make_app
    k = Var("k", INT)
    psi_i = comp_goals[1].lhs.constraint
    psi_b = Not(Exists((k,), conj([Atom(mk(">", (k, Lit(1)))), Eq(n, mk("*", (i, k)))])))
    u = Var("u", INT)
    psi_c = conj(
        [
            Atom(mk("<=", (Lit(2), mk("+", (i, Lit(1)))))),
            Exists(
                (u,),
                conj(
                    [
                        Atom(mk("<=", (mk("+", (i, Lit(1))), u))),
                        Atom(mk("<", (u, n))),
                        Eq(mk("mod", (n, u)), Lit(0)),
                    ]
                ),
            ),
        ]
    )
    rf = ReachabilityFormula(
        ConstrainedTerm(mk("loop", (n, mk("+", (i, Lit(1))))), conj([psi_i, psi_b, Not(psi_c)])),
        comp_goals[1].rhs,
    )
    node = prover.apply_axiom(goal_of(rf))
    assert node is not None and node.kind == AXIOM


def test_axiom_skips_satisfiable(prover, comp_goals):
    assert prover.apply_axiom(goal_of(comp_goals[0])) is None


def test_subs_residual_empties_on_matching_target(prover, comp_sig, comp_goals):
    mk = comp_sig.make_app
    lhs = ConstrainedTerm(mk("comp", ()), TRUE)
    rf = ReachabilityFormula(lhs, ConstrainedTerm(mk("comp", ()), TRUE))
    hit = prover.apply_subs(goal_of(rf))
    assert hit is not None
    _, child = hit
    assert isinstance(child.formula.lhs.constraint, FalseF)


def test_subs_skips_constructor_clash(prover, comp_sig, comp_goals):
    mk = comp_sig.make_app
    rf = ReachabilityFormula(ConstrainedTerm(mk("init", (n,)), TRUE), ConstrainedTerm(mk("comp", ()), TRUE))
    assert prover.apply_subs(goal_of(rf)) is None


def test_subs_residual_interval(comp_system, solver_cfg, comp_sig):
    # x > 0 into y > 5 leaves exactly 0 < x <= 5
    mk = comp_sig.make_app
    lhs = ConstrainedTerm(mk("init", (x,)), Atom(mk(">", (x, Lit(0)))))
    rhs = ConstrainedTerm(mk("init", (y,)), Atom(mk(">", (y, Lit(5)))))
    prover = Prover(comp_system, [], SearchConfig(solver=solver_cfg))
    hit = prover.apply_subs(goal_of(ReachabilityFormula(lhs, rhs)))
    assert hit is not None
    _, child = hit
    from coreach.oracle import Domain, enumerate_instances

    got = enumerate_instances(comp_sig, child.formula.lhs, Domain(10))
    assert got == frozenset(mk("init", (Lit(v),)) for v in range(1, 6))


def test_circ_requires_der_ancestor(prover, comp_goals):
    with pytest.raises(GuardednessViolation):
        prover.apply_circ(goal_of(comp_goals[1]), 1)


def test_circ_builds_both_children(prover, comp_sig, comp_goals):
    mk = comp_sig.make_app
    psi1 = comp_goals[0].lhs.constraint
    g = goal_of(
        ReachabilityFormula(ConstrainedTerm(mk("loop", (n, Lit(2))), psi1), comp_goals[0].rhs),
        has_der_ancestor=True,
    )
    hit = prover.apply_circ(g, 1)
    assert hit is not None
    cond, cont, residual = hit
    assert cont.formula.lhs.term == mk("comp", ())
    assert residual.formula.lhs.term == mk("loop", (n, Lit(2)))


def test_circ_skips_unmatched_lhs(prover, comp_sig, comp_goals):
    mk = comp_sig.make_app
    g = goal_of(
        ReachabilityFormula(ConstrainedTerm(mk("init", (n,)), TRUE), comp_goals[0].rhs),
        has_der_ancestor=True,
    )
    # circularity 1 has lhs loop(...); unifying with init(n) clashes
    assert prover.apply_circ(g, 1) is None


def test_der_children_and_depth(prover, comp_goals):
    hit = prover.apply_der(goal_of(comp_goals[0]))
    assert hit is not None
    conds, children = hit
    assert len(children) == 1
    assert children[0].depth == 1 and children[0].has_der_ancestor


def test_der_not_applicable_on_final(prover, comp_sig, comp_goals):
    mk = comp_sig.make_app
    rf = ReachabilityFormula(ConstrainedTerm(mk("comp", ()), TRUE), comp_goals[0].rhs)
    assert prover.apply_der(goal_of(rf)) is None


def test_disj_split_and_rejection(comp_system, comp_sig, solver_cfg, comp_goals):
    mk = comp_sig.make_app
    chi = Atom(mk("<", (n, Lit(0))))
    phi = Atom(mk("<", (n, Lit(10))))
    rf = ReachabilityFormula(ConstrainedTerm(mk("init", (n,)), phi), comp_goals[0].rhs)
    prover = Prover(comp_system, [], SearchConfig(solver=solver_cfg, enable_disj=True))
    cond, g1, g2 = prover.apply_disj(goal_of(rf), (conj([phi, chi]), conj([phi, Not(chi)])))
    assert g1.formula.lhs.constraint == conj([phi, chi])
    # idempotent split is accepted
    prover.apply_disj(goal_of(rf), (phi, phi))
    with pytest.raises(InvalidSplit):
        prover.apply_disj(goal_of(rf), (conj([phi, chi]), conj([phi, chi])))


def test_prove_both_circularities(prover):
    result = prover.prove_all()
    assert [r.status for r in result.per_goal] == [PROVED, PROVED]
    for r in result.per_goal:
        assert check_guarded(r.tree)
        assert audit_structure(r.tree) == []


def test_prove_trivial_false_goal(comp_system, comp_sig, solver_cfg):
    mk = comp_sig.make_app
    rf = ReachabilityFormula(ConstrainedTerm(mk("init", (n,)), FALSE), ConstrainedTerm(mk("comp", ()), TRUE))
    prover = Prover(comp_system, [rf], SearchConfig(solver=solver_cfg))
    (res,) = prover.prove_all().per_goal
    assert res.status == PROVED
    assert res.tree.kind == AXIOM


def test_prove_fails_without_loop_circularity(comp_system, comp_goals, solver_cfg):
    prover = Prover(comp_system, [comp_goals[0]], SearchConfig(max_der_depth=3, solver=solver_cfg))
    (res,) = prover.prove_all().per_goal
    assert res.status == FAILED
    assert res.frontier
    assert all(og.reason == "depth" for og in res.frontier)


def test_search_is_deterministic(comp_system, comp_goals, solver_cfg):
    def run():
        p = Prover(comp_system, comp_goals, SearchConfig(max_der_depth=10, solver=solver_cfg))
        return [render_json(r.tree) for r in p.prove_all().per_goal]

    assert run() == run()


def test_no_stacked_subsumptions(prover):
    for r in prover.prove_all().per_goal:
        for node in r.tree.walk():
            if node.kind == SUBS:
                assert node.children[0].kind != SUBS


def test_reverify_accepts_fresh_run(prover, comp_sig, solver_cfg):
    result = prover.prove_all()
    for r in result.per_goal:
        assert reverify(comp_sig, r.tree, solver_cfg) == []


def test_check_guarded_examples(prover, comp_goals):
    result = prover.prove_all()
    assert all(check_guarded(r.tree) for r in result.per_goal)
    bare_circ = ProofNode(CIRC, comp_goals[0])
    assert not check_guarded(bare_circ)
    nested = ProofNode(DER, comp_goals[0], children=(ProofNode(SUBS, comp_goals[0], children=(bare_circ,)),))
    assert check_guarded(nested)


def test_render_text_and_json(prover):
    result = prover.prove_all()
    text = render_text(result.per_goal[0].tree)
    assert "[der]" in text and "lhs-unsat" in text
    blob = to_json_dict(result.per_goal[1].tree)
    assert blob["rule"] == "der"
    assert {c["rule"] for c in blob["children"]} == {"subs", "circ"}


def test_first_circularity_tree_shape(prover):
    # derivative step, then reuse of the loop goal; the continuation closes
    # through subsumption and the negated-reuse residual closes outright
    result = prover.prove_all()
    tree = result.per_goal[0].tree
    assert tree.kind == DER and len(tree.children) == 1
    circ = tree.children[0]
    assert circ.kind == CIRC and circ.circularity_used == 1
    cont, residual = circ.children
    assert cont.kind == SUBS and cont.children[0].kind == AXIOM
    assert residual.kind == AXIOM
