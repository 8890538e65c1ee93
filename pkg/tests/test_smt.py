"""Encoding and solver-driving behavior, including the subprocess path."""

import stat

import pytest

from coreach.errors import MalformedSolverOutput, NonBuiltinResidue, SolverUnavailable
from coreach.formulas import Atom, Eq, Exists, FALSE, Not, TRUE, conj
from coreach.minismt.sexpr import parse_all, unparse
from coreach.smt import (
    SolverConfig,
    Validity,
    Verdict,
    check_sat,
    check_valid,
    encode,
    resolve_solver,
)
from coreach.terms import INT, Lit, Var

n, k, u = Var("n", INT), Var("k", INT), Var("u", INT)


def exists_double(mk):
    return Exists((k,), conj([Atom(mk(">", (k, Lit(1)))), Eq(Lit(6), mk("*", (Lit(2), k)))]))


def psi(mk):
    return Exists(
        (u,),
        conj([Atom(mk("<", (Lit(1), u))), Atom(mk("<", (u, n))), Eq(mk("mod", (n, u)), Lit(0))]),
    )


def test_encode_quantified_witness(comp_sig):
    script = encode(comp_sig, exists_double(comp_sig.make_app))
    assert "(exists ((k Int))" in script
    assert "(and (> k 1) (= 6 (* 2 k)))" in script
    assert script.strip().endswith("(check-sat)")


def test_encode_false(comp_sig):
    script = encode(comp_sig, FALSE)
    assert "(assert false)" in script


def test_encode_declares_free_variables(comp_sig):
    script = encode(comp_sig, psi(comp_sig.make_app))
    assert "(declare-const n Int)" in script
    assert "(exists ((u Int))" in script


def test_encode_deterministic_and_sexpr_roundtrip(comp_sig):
    f = conj([psi(comp_sig.make_app), Atom(comp_sig.make_app("<", (Lit(0), n)))])
    s1, s2 = encode(comp_sig, f), encode(comp_sig, f)
    assert s1 == s2
    forms = parse_all(s1)
    once = "\n".join(unparse(x) for x in forms)
    twice = "\n".join(unparse(x) for x in parse_all(once))
    assert once == twice


def test_encode_rejects_constructor_residue(comp_sig):
    mk = comp_sig.make_app
    with pytest.raises(NonBuiltinResidue):
        encode(comp_sig, Eq(mk("comp", ()), mk("comp", ())))
    with pytest.raises(NonBuiltinResidue):
        encode(comp_sig, Eq(Var("x", comp_sig.sorts["Cfg"]), Var("y", comp_sig.sorts["Cfg"])))


def test_check_sat_witness(comp_sig, solver_cfg):
    res = check_sat(comp_sig, exists_double(comp_sig.make_app), solver_cfg)
    assert res.verdict == Verdict.SAT


def test_check_sat_prime_is_unsat(comp_sig, solver_cfg):
    f = conj([psi(comp_sig.make_app), Eq(n, Lit(5))])
    assert check_sat(comp_sig, f, solver_cfg).verdict == Verdict.UNSAT


def test_check_sat_composite_is_sat(comp_sig, solver_cfg):
    f = conj([psi(comp_sig.make_app), Eq(n, Lit(6))])
    assert check_sat(comp_sig, f, solver_cfg).verdict == Verdict.SAT


def test_check_valid_trivialities(comp_sig, solver_cfg):
    assert check_valid(comp_sig, TRUE, solver_cfg)[0] == Validity.VALID
    mk = comp_sig.make_app
    assert check_valid(comp_sig, Atom(mk(">", (n, Lit(0)))), solver_cfg)[0] == Validity.INVALID


def test_check_valid_guard_complementarity(comp_sig, solver_cfg):
    # guards of the two loop rules split every instance of psi
    mk = comp_sig.make_app
    body = conj([Atom(mk(">", (k, Lit(1)))), Eq(n, mk("*", (Lit(2), k)))])
    b = Exists((k,), body)
    p = psi(mk)
    from coreach.formulas import Implies, Or

    f = Implies(p, Or((conj([p, b]), conj([p, Not(b)]))))
    assert check_valid(comp_sig, f, solver_cfg)[0] == Validity.VALID


def test_model_from_builtin_solver(comp_sig):
    cfg = SolverConfig(command=("builtin",), timeout_ms=10_000, want_model=True)
    res = check_sat(comp_sig, Eq(n, Lit(7)), cfg)
    assert res.verdict == Verdict.SAT
    assert res.model == (("n", 7),)


def test_builtin_subprocess_path(comp_sig):
    cfg = SolverConfig(command=("builtin-subprocess",), timeout_ms=20_000)
    f = conj([psi(comp_sig.make_app), Eq(n, Lit(5))])
    assert check_sat(comp_sig, f, cfg).verdict == Verdict.UNSAT


def test_solver_unavailable(comp_sig):
    cfg = SolverConfig(command=("/nonexistent/solver-binary",), timeout_ms=1000)
    with pytest.raises(SolverUnavailable):
        check_sat(comp_sig, TRUE, cfg)


def test_malformed_solver_output(comp_sig, tmp_path):
    fake = tmp_path / "fake-solver"
    fake.write_text("#!/bin/sh\necho gibberish\n")
    fake.chmod(fake.stat().st_mode | stat.S_IEXEC)
    cfg = SolverConfig(command=(str(fake),), timeout_ms=2000)
    with pytest.raises(MalformedSolverOutput):
        check_sat(comp_sig, TRUE, cfg)


def test_timeout_degrades_to_unknown(comp_sig, tmp_path):
    fake = tmp_path / "slow-solver"
    fake.write_text("#!/bin/sh\nsleep 30\n")
    fake.chmod(fake.stat().st_mode | stat.S_IEXEC)
    cfg = SolverConfig(command=(str(fake),), timeout_ms=200)
    res = check_sat(comp_sig, TRUE, cfg)
    assert res.verdict == Verdict.UNKNOWN


def test_resolve_solver_precedence(monkeypatch):
    monkeypatch.delenv("RMT_SOLVER", raising=False)
    cfg = resolve_solver("builtin")
    assert cfg.command == ("builtin",)
    monkeypatch.setenv("RMT_SOLVER", "builtin-subprocess")
    assert resolve_solver(None).command == ("builtin-subprocess",)
    monkeypatch.setenv("RMT_SOLVER", "z3 -smt2")
    assert resolve_solver(None).command == ("z3", "-smt2", "-in")


def test_bruteforce_sat_never_contradicted_by_solver(comp_sig, solver_cfg):
    # One-sided coherence: an in-range witness found by enumeration forbids
    # an unsat verdict from the solver.
    from itertools import product

    from coreach.oracle import Domain, eval_formula

    mk = comp_sig.make_app
    i = Var("i", INT)
    dom = Domain(3)
    pool = [
        conj([Atom(mk("<", (Lit(0), n))), Atom(mk("<", (n, Lit(3))))]),
        Eq(mk("*", (n, n)), Lit(4)),
        conj([Eq(mk("mod", (n, Lit(2))), Lit(0)), Atom(mk("<", (i, n)))]),
        Exists((k,), Eq(n, mk("+", (k, k)))),
    ]
    for f in pool:
        vs = sorted({v for v in (n, i) if v in __import__("coreach.formulas", fromlist=["free_vars"]).free_vars(f)}, key=lambda v: v.name)
        witness = any(
            eval_formula(comp_sig, f, dict(zip(vs, combo)), dom)
            for combo in product(dom.ints(), repeat=len(vs))
        )
        if witness:
            assert check_sat(comp_sig, f, solver_cfg).verdict != Verdict.UNSAT
