"""Constraint algorithms: unification modulo builtins, simplification, inclusion.

Unification reduces a mixed equation over constructors and builtin operators
to constructor-variable bindings plus a residual conjunction of builtin
equations.  Builtin-operator-headed subterms are opaque here: their equations
ship to the solver untouched.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import SortMismatch
from .formulas import (
    And,
    Atom,
    ConstrainedTerm,
    Eq,
    Exists,
    FALSE,
    FalseF,
    Forall,
    Formula,
    Iff,
    Implies,
    Not,
    Or,
    TRUE,
    TrueF,
    conj,
    disj,
    exists,
    free_vars,
    subst_formula,
)
from .signature import Signature
from .terms import App, FRESH_SEP, Lit, Substitution, Term, Var, term_vars


@dataclass(frozen=True)
class SolvedForm:
    """One disjunct of a unification result."""

    subst: Substitution
    residual: tuple[Formula, ...]

    def as_formula(self) -> Formula:
        eqs = [Eq(v, t) for v, t in sorted(self.subst.mapping.items(), key=lambda kv: kv[0].name)]
        return conj(eqs + list(self.residual))


def euclid_div(a: int, b: int) -> int:
    if b == 0:
        return 0
    if b > 0:
        return a // b
    return -(a // -b)


def euclid_mod(a: int, b: int) -> int:
    # Remainder in [0, |b|); by convention a mod 0 = a.
    if b == 0:
        return a
    return a - b * euclid_div(a, b)


def _is_builtin_valued(sig: Signature, t: Term) -> bool:
    return sig.least_sort(t).builtin


def unify_modulo_builtins(sig: Signature, t1: Term, t2: Term) -> list[SolvedForm]:
    """Solved forms whose disjunction is equivalent to t1 = t2 in the term model.

    Empty list means the equation is unsatisfiable (constructor clash or a
    cyclic constructor equation).
    """
    s1, s2 = sig.least_sort(t1), sig.least_sort(t2)
    if not (sig.connected(s1, s2) or sig.is_subsort(s1, s2) or sig.is_subsort(s2, s1)):
        raise SortMismatch(f"{t1!r} : {s1} and {t2!r} : {s2} share no supersort")

    work: list[tuple[Term, Term]] = [(t1, t2)]
    bindings: dict[Var, Term] = {}
    residual: list[Formula] = []

    def resolve(t: Term) -> Term:
        return Substitution(bindings).apply(t) if bindings else t

    while work:
        a, b = work.pop(0)
        a, b = resolve(a), resolve(b)
        if a == b:
            continue
        a_builtin = _is_builtin_valued(sig, a)
        b_builtin = _is_builtin_valued(sig, b)
        if a_builtin and b_builtin:
            if isinstance(a, Lit) and isinstance(b, Lit):
                return []  # distinct literals
            residual.append(Eq(a, b))
            continue
        if a_builtin != b_builtin:
            return []  # builtin value vs constructor term
        # Both constructor-sorted.
        if isinstance(b, Var) and not isinstance(a, Var):
            a, b = b, a
        if isinstance(a, Var):
            if isinstance(b, Var):
                if sig.is_subsort(b.sort, a.sort):
                    pass  # bind a to the smaller-sorted b
                elif sig.is_subsort(a.sort, b.sort):
                    a, b = b, a
                else:
                    return []
                if FRESH_SEP in b.name and FRESH_SEP not in a.name:
                    a, b = b, a
                bindings = _bind(bindings, a, b)
                continue
            if a in term_vars(b):
                return []  # occurs check: no cyclic constructor values
            if not sig.is_subsort(sig.least_sort(b), a.sort):
                return []
            bindings = _bind(bindings, a, b)
            continue
        assert isinstance(a, App) and isinstance(b, App)
        if a.symbol != b.symbol or len(a.args) != len(b.args):
            return []
        work.extend(zip(a.args, b.args))

    sigma = Substitution(bindings)
    residual = [Eq(sigma.apply(e.lhs), sigma.apply(e.rhs)) for e in residual]
    residual = [e for e in residual if e.lhs != e.rhs]
    return [SolvedForm(sigma, tuple(residual))]


def _bind(bindings: dict[Var, Term], v: Var, t: Term) -> dict[Var, Term]:
    one = Substitution({v: t})
    out = {w: one.apply(u) for w, u in bindings.items()}
    out[v] = t
    return {w: u for w, u in out.items() if w != u}


# -- term-level constant folding -------------------------------------------------


def fold_term(t: Term) -> Term:
    if not isinstance(t, App):
        return t
    args = tuple(fold_term(a) for a in t.args)
    t = App(t.symbol, args, t.sort)
    if all(isinstance(a, Lit) for a in args):
        vals = [a.value for a in args]
        out = _eval_builtin(t.symbol, vals)
        if out is not None:
            return Lit(out)
    # Unit laws over Int, valid in the standard model.
    if t.symbol == "+" and len(args) == 2:
        if args[0] == Lit(0):
            return args[1]
        if args[1] == Lit(0):
            return args[0]
    if t.symbol == "-" and len(args) == 2 and args[1] == Lit(0):
        return args[0]
    if t.symbol == "*" and len(args) == 2:
        if Lit(0) in args:
            return Lit(0)
        if args[0] == Lit(1):
            return args[1]
        if args[1] == Lit(1):
            return args[0]
    return t


def _eval_builtin(symbol: str, vals: list):
    match symbol:
        case "+":
            return vals[0] + vals[1]
        case "-":
            return -vals[0] if len(vals) == 1 else vals[0] - vals[1]
        case "*":
            return vals[0] * vals[1]
        case "div":
            return euclid_div(vals[0], vals[1])
        case "mod":
            return euclid_mod(vals[0], vals[1])
        case "<":
            return bool(vals[0] < vals[1])
        case "<=":
            return bool(vals[0] <= vals[1])
        case ">":
            return bool(vals[0] > vals[1])
        case ">=":
            return bool(vals[0] >= vals[1])
        case "=":
            return bool(vals[0] == vals[1])
        case "and":
            return bool(vals[0] and vals[1])
        case "or":
            return bool(vals[0] or vals[1])
        case "not":
            return not vals[0]
    return None


# -- formula simplification -------------------------------------------------------

SIMPLIFY_PASS_CAP = 10


def simplify(sig: Signature, f: Formula) -> Formula:
    """Equivalence-preserving simplification; keeps the satisfying valuations intact."""
    for _ in range(SIMPLIFY_PASS_CAP):
        nf = _simp(sig, f)
        if nf == f:
            return nf
        f = nf
    import warnings

    warnings.warn(f"simplification stopped at the {SIMPLIFY_PASS_CAP}-pass cap", RuntimeWarning)
    return f


def _simp(sig: Signature, f: Formula) -> Formula:
    if isinstance(f, (TrueF, FalseF)):
        return f
    if isinstance(f, Atom):
        t = fold_term(f.term)
        if isinstance(t, Lit):
            return TRUE if t.value else FALSE
        return Atom(t)
    if isinstance(f, Eq):
        lt, rt = fold_term(f.lhs), fold_term(f.rhs)
        if lt == rt:
            return TRUE
        if isinstance(lt, Lit) and isinstance(rt, Lit):
            return TRUE if lt.value == rt.value else FALSE
        if _is_builtin_valued(sig, lt) and _is_builtin_valued(sig, rt):
            return Eq(lt, rt)
        try:
            forms = unify_modulo_builtins(sig, lt, rt)
        except SortMismatch:
            return FALSE
        return disj([sf.as_formula() for sf in forms])
    if isinstance(f, Not):
        b = _simp(sig, f.body)
        if isinstance(b, TrueF):
            return FALSE
        if isinstance(b, FalseF):
            return TRUE
        if isinstance(b, Not):
            return b.body
        return Not(b)
    if isinstance(f, And):
        parts: list[Formula] = []
        for p in f.parts:
            sp = _simp(sig, p)
            if isinstance(sp, FalseF):
                return FALSE
            if isinstance(sp, TrueF):
                continue
            if isinstance(sp, And):
                parts.extend(sp.parts)
            elif sp not in parts:
                parts.append(sp)
        for p in parts:
            if Not(p) in parts or (isinstance(p, Not) and p.body in parts):
                return FALSE
        parts = _propagate_bindings(sig, parts)
        return conj(parts)
    if isinstance(f, Or):
        parts = []
        for p in f.parts:
            sp = _simp(sig, p)
            if isinstance(sp, TrueF):
                return TRUE
            if isinstance(sp, FalseF):
                continue
            if isinstance(sp, Or):
                parts.extend(sp.parts)
            elif sp not in parts:
                parts.append(sp)
        for p in parts:
            if Not(p) in parts or (isinstance(p, Not) and p.body in parts):
                return TRUE
        return disj(parts)
    if isinstance(f, Implies):
        a, b = _simp(sig, f.premise), _simp(sig, f.conclusion)
        if isinstance(a, TrueF):
            return b
        if isinstance(a, FalseF) or isinstance(b, TrueF):
            return TRUE
        if isinstance(b, FalseF):
            return _simp(sig, Not(a))
        if a == b:
            return TRUE
        return Implies(a, b)
    if isinstance(f, Iff):
        a, b = _simp(sig, f.lhs), _simp(sig, f.rhs)
        if a == b:
            return TRUE
        if isinstance(a, TrueF):
            return b
        if isinstance(b, TrueF):
            return a
        if isinstance(a, FalseF):
            return _simp(sig, Not(b))
        if isinstance(b, FalseF):
            return _simp(sig, Not(a))
        return Iff(a, b)
    if isinstance(f, (Exists, Forall)):
        body = _simp(sig, f.body)
        cls = type(f)
        if isinstance(body, cls) and not (set(f.bound) & set(body.bound)):
            body, bound = body.body, f.bound + body.bound
        else:
            bound = f.bound
        if isinstance(f, Exists):
            bound, body = _one_point(sig, bound, body)
        fv = free_vars(body)
        bound = tuple(v for v in bound if v in fv)
        if isinstance(body, (TrueF, FalseF)) or not bound:
            return body
        return cls(bound, body)
    raise TypeError(f"_simp: {f!r}")


def _eligible_binding(p: Formula, candidates) -> tuple[Var, Term] | None:
    if not isinstance(p, Eq):
        return None
    for x, t in ((p.lhs, p.rhs), (p.rhs, p.lhs)):
        if isinstance(x, Var) and candidates(x) and x not in term_vars(t):
            return x, t
    return None


def _propagate_bindings(sig: Signature, parts: list[Formula]) -> list[Formula]:
    """Push x = t conjuncts into sibling conjuncts (the equation itself stays).

    Only variable/literal bindings propagate here; compound right-hand sides
    would bloat sibling formulas without eliminating anything.
    """
    for i, p in enumerate(parts):
        hit = _eligible_binding(p, lambda v: True)
        if hit is None:
            continue
        x, t = hit
        if not isinstance(t, (Var, Lit)):
            continue
        if isinstance(t, Var) and FRESH_SEP in x.name and FRESH_SEP not in t.name:
            x, t = t, x  # prefer to keep user-named variables in view
        sigma = Substitution({x: t})
        changed = False
        out = list(parts)
        for j, q in enumerate(parts):
            if j == i:
                continue
            nq = subst_formula(sigma, q)
            if nq != q:
                out[j] = _simp(sig, nq)
                changed = True
        if changed:
            return out
    return parts


def _one_point(sig: Signature, bound: tuple[Var, ...], body: Formula):
    """∃x.(x = t ∧ φ) collapses to φ[x := t] when x does not occur in t."""
    bound = list(bound)
    changed = True
    while changed and bound:
        changed = False
        parts = list(body.parts) if isinstance(body, And) else [body]
        for i, p in enumerate(parts):
            hit = _eligible_binding(p, lambda v: v in bound)
            if hit is None:
                continue
            x, t = hit
            rest = parts[:i] + parts[i + 1 :]
            body = _simp(sig, subst_formula(Substitution({x: t}), conj(rest)))
            bound.remove(x)
            changed = True
            break
    return tuple(bound), body


def simplify_constrained(
    sig: Signature, ct: ConstrainedTerm, protected: frozenset[str] = frozenset()
) -> ConstrainedTerm:
    """Simplify a constrained term; may eliminate unprotected free variables.

    Eliminating x via a conjunct x = t preserves the set of ground instances
    but changes the valuation set, so every variable that is shared with a
    surrounding goal must appear in `protected`.
    """
    term = fold_term(ct.term)
    constraint = simplify(sig, ct.constraint)
    for _ in range(SIMPLIFY_PASS_CAP):
        if isinstance(constraint, FalseF):
            return ConstrainedTerm(term, FALSE)
        parts = list(constraint.parts) if isinstance(constraint, And) else [constraint]
        hit = None
        for i, p in enumerate(parts):
            found = _eligible_binding(p, lambda v: v.name not in protected)
            if found is None:
                continue
            x, t = found
            if isinstance(t, Var) and t.name not in protected:
                # Both ends disposable: drop the fresh-named one if we can.
                if FRESH_SEP in t.name and FRESH_SEP not in x.name:
                    x, t = t, x
            if hit is None or (FRESH_SEP in x.name and FRESH_SEP not in hit[0].name):
                hit = (x, t, i)
        if hit is None:
            return ConstrainedTerm(term, constraint)
        x, t, i = hit
        sigma = Substitution({x: t})
        term = fold_term(sigma.apply(term))
        rest = parts[:i] + parts[i + 1 :]
        constraint = simplify(sig, subst_formula(sigma, conj(rest)))
    return ConstrainedTerm(term, constraint)


# -- semantic inclusion -----------------------------------------------------------


def reduced_equation(sig: Signature, t1: Term, t2: Term) -> Formula:
    """t1 = t2 as a constructor-free formula (disjunction over solved forms)."""
    if _is_builtin_valued(sig, t1) and _is_builtin_valued(sig, t2):
        return Eq(t1, t2)
    try:
        forms = unify_modulo_builtins(sig, t1, t2)
    except SortMismatch:
        return FALSE
    return disj([sf.as_formula() for sf in forms])


def semantic_inclusion_condition(sig: Signature, ct1: ConstrainedTerm, ct2: ConstrainedTerm) -> Formula:
    """φ → ∃x̃.(t = t' ∧ φ') with x̃ the variables private to ct2.

    Validity of the result is equivalent to inclusion of the instance sets of
    ct1 in ct2 under every consistent instantiation of the shared variables.
    """
    extra = sorted(free_vars(ct2) - free_vars(ct1), key=lambda v: v.name)
    body = conj([reduced_equation(sig, ct1.term, ct2.term), ct2.constraint])
    return Implies(ct1.constraint, exists(extra, body))
