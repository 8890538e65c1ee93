"""First-order constraint formulas over the full signature, and constrained terms.

Equality is structural.  `subst_formula` is capture-avoiding: binders are
alpha-renamed on the fly when a replacement term would be captured.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

from .terms import App, Lit, Substitution, Term, Var, term_vars


@dataclass(frozen=True, slots=True)
class TrueF:
    def __repr__(self):
        return "true"


@dataclass(frozen=True, slots=True)
class FalseF:
    def __repr__(self):
        return "false"


@dataclass(frozen=True, slots=True)
class Eq:
    lhs: Term
    rhs: Term

    def __repr__(self):
        return f"{self.lhs!r} = {self.rhs!r}"


@dataclass(frozen=True, slots=True)
class Atom:
    """A Bool-sorted term used as an atomic formula."""

    term: Term

    def __repr__(self):
        return repr(self.term)


@dataclass(frozen=True, slots=True)
class Not:
    body: "Formula"

    def __repr__(self):
        return f"~({self.body!r})"


@dataclass(frozen=True, slots=True)
class And:
    parts: tuple["Formula", ...]

    def __repr__(self):
        return "(" + " /\\ ".join(map(repr, self.parts)) + ")"


@dataclass(frozen=True, slots=True)
class Or:
    parts: tuple["Formula", ...]

    def __repr__(self):
        return "(" + " \\/ ".join(map(repr, self.parts)) + ")"


@dataclass(frozen=True, slots=True)
class Implies:
    premise: "Formula"
    conclusion: "Formula"

    def __repr__(self):
        return f"({self.premise!r} -> {self.conclusion!r})"


@dataclass(frozen=True, slots=True)
class Iff:
    lhs: "Formula"
    rhs: "Formula"

    def __repr__(self):
        return f"({self.lhs!r} <-> {self.rhs!r})"


@dataclass(frozen=True, slots=True)
class Exists:
    bound: tuple[Var, ...]
    body: "Formula"

    def __repr__(self):
        return f"(exists {', '.join(map(repr, self.bound))} . {self.body!r})"


@dataclass(frozen=True, slots=True)
class Forall:
    bound: tuple[Var, ...]
    body: "Formula"

    def __repr__(self):
        return f"(forall {', '.join(map(repr, self.bound))} . {self.body!r})"


Formula = Union[TrueF, FalseF, Eq, Atom, Not, And, Or, Implies, Iff, Exists, Forall]

TRUE = TrueF()
FALSE = FalseF()


def conj(parts) -> Formula:
    flat: list[Formula] = []
    for p in parts:
        if isinstance(p, TrueF):
            continue
        if isinstance(p, And):
            flat.extend(p.parts)
        else:
            flat.append(p)
    if not flat:
        return TRUE
    if len(flat) == 1:
        return flat[0]
    return And(tuple(flat))


def disj(parts) -> Formula:
    flat: list[Formula] = []
    for p in parts:
        if isinstance(p, FalseF):
            continue
        if isinstance(p, Or):
            flat.extend(p.parts)
        else:
            flat.append(p)
    if not flat:
        return FALSE
    if len(flat) == 1:
        return flat[0]
    return Or(tuple(flat))


def exists(bound, body: Formula) -> Formula:
    bound = tuple(bound)
    return Exists(bound, body) if bound else body


@dataclass(frozen=True, slots=True)
class ConstrainedTerm:
    """A term with variables paired with a first-order constraint."""

    term: Term
    constraint: Formula

    def __repr__(self):
        return f"<{self.term!r} | {self.constraint!r}>"


def free_vars(x) -> set[Var]:
    """Free variables of a term, formula, or constrained term."""
    if isinstance(x, (Var, Lit, App)):
        return term_vars(x)
    if isinstance(x, ConstrainedTerm):
        return term_vars(x.term) | free_vars(x.constraint)
    if isinstance(x, (TrueF, FalseF)):
        return set()
    if isinstance(x, Eq):
        return term_vars(x.lhs) | term_vars(x.rhs)
    if isinstance(x, Atom):
        return term_vars(x.term)
    if isinstance(x, Not):
        return free_vars(x.body)
    if isinstance(x, (And, Or)):
        out: set[Var] = set()
        for p in x.parts:
            out |= free_vars(p)
        return out
    if isinstance(x, Implies):
        return free_vars(x.premise) | free_vars(x.conclusion)
    if isinstance(x, Iff):
        return free_vars(x.lhs) | free_vars(x.rhs)
    if isinstance(x, (Exists, Forall)):
        return free_vars(x.body) - set(x.bound)
    raise TypeError(f"free_vars: {x!r}")


def subst_formula(sigma: Substitution, f: Formula) -> Formula:
    if isinstance(f, (TrueF, FalseF)):
        return f
    if isinstance(f, Eq):
        return Eq(sigma.apply(f.lhs), sigma.apply(f.rhs))
    if isinstance(f, Atom):
        return Atom(sigma.apply(f.term))
    if isinstance(f, Not):
        return Not(subst_formula(sigma, f.body))
    if isinstance(f, And):
        return And(tuple(subst_formula(sigma, p) for p in f.parts))
    if isinstance(f, Or):
        return Or(tuple(subst_formula(sigma, p) for p in f.parts))
    if isinstance(f, Implies):
        return Implies(subst_formula(sigma, f.premise), subst_formula(sigma, f.conclusion))
    if isinstance(f, Iff):
        return Iff(subst_formula(sigma, f.lhs), subst_formula(sigma, f.rhs))
    if isinstance(f, (Exists, Forall)):
        relevant = {v: t for v, t in sigma.mapping.items() if v not in f.bound}
        if not relevant:
            return f
        inner = Substitution(relevant)
        img_vars: set[Var] = set()
        for t in relevant.values():
            img_vars |= term_vars(t)
        bound = list(f.bound)
        body = f.body
        if img_vars & set(bound):
            # Alpha-rename captured binders before substituting under them.
            taken = {v.name for v in img_vars | free_vars(body) | set(bound)}
            ren: dict[Var, Term] = {}
            for i, b in enumerate(bound):
                if b in img_vars:
                    k = 1
                    while f"{b.name}!{k}" in taken:
                        k += 1
                    nb = Var(f"{b.name}!{k}", b.sort)
                    taken.add(nb.name)
                    ren[b] = nb
                    bound[i] = nb
            body = subst_formula(Substitution(ren), body)
        cls = type(f)
        return cls(tuple(bound), subst_formula(inner, body))
    raise TypeError(f"subst_formula: {f!r}")


def subst_constrained(sigma: Substitution, ct: ConstrainedTerm) -> ConstrainedTerm:
    return ConstrainedTerm(sigma.apply(ct.term), subst_formula(sigma, ct.constraint))


# -- surface-syntax printing ---------------------------------------------------

_TERM_PREC = {"+": 7, "-": 7, "*": 8, "div": 8, "mod": 8}
_CMP = {"<", "<=", ">", ">=", "="}


def pretty_term(t: Term, prec: int = 0) -> str:
    if isinstance(t, Var):
        return t.name
    if isinstance(t, Lit):
        if isinstance(t.value, bool):
            return "true" if t.value else "false"
        return str(t.value) if t.value >= 0 else f"(- {-t.value})" if prec >= 9 else f"-{t.value}"
    if t.symbol in _TERM_PREC and len(t.args) == 2:
        p = _TERM_PREC[t.symbol]
        s = f"{pretty_term(t.args[0], p)} {t.symbol} {pretty_term(t.args[1], p + 1)}"
        return f"({s})" if prec > p else s
    if t.symbol == "-" and len(t.args) == 1:
        return f"-{pretty_term(t.args[0], 9)}"
    if t.symbol in _CMP | {"and", "or", "not"} and t.args:
        # Bool-sorted builtin application in term position.
        inner = ", ".join(pretty_term(a) for a in t.args)
        return f"{t.symbol}({inner})"
    if not t.args:
        return t.symbol
    return f"{t.symbol}({', '.join(pretty_term(a) for a in t.args)})"


def pretty_formula(f: Formula, prec: int = 0) -> str:
    # Connective precedence: <-> 1, -> 2, \/ 3, /\ 4, ~ 5, atoms 6.
    if isinstance(f, TrueF):
        return "true"
    if isinstance(f, FalseF):
        return "false"
    if isinstance(f, Eq):
        return f"{pretty_term(f.lhs, 7)} = {pretty_term(f.rhs, 7)}"
    if isinstance(f, Atom):
        t = f.term
        if isinstance(t, App) and t.symbol in _CMP and len(t.args) == 2:
            return f"{pretty_term(t.args[0], 7)} {t.symbol} {pretty_term(t.args[1], 7)}"
        return pretty_term(t)
    if isinstance(f, Not):
        return f"~{pretty_formula(f.body, 5)}"
    if isinstance(f, And):
        s = " /\\ ".join(pretty_formula(p, 5) for p in f.parts)
        return f"({s})" if prec > 4 or len(f.parts) < 2 else s
    if isinstance(f, Or):
        s = " \\/ ".join(pretty_formula(p, 4) for p in f.parts)
        return f"({s})" if prec > 3 or len(f.parts) < 2 else s
    if isinstance(f, Implies):
        s = f"{pretty_formula(f.premise, 3)} -> {pretty_formula(f.conclusion, 2)}"
        return f"({s})" if prec > 2 else s
    if isinstance(f, Iff):
        s = f"{pretty_formula(f.lhs, 2)} <-> {pretty_formula(f.rhs, 1)}"
        return f"({s})" if prec > 1 else s
    if isinstance(f, (Exists, Forall)):
        kw = "exists" if isinstance(f, Exists) else "forall"
        if len(f.bound) == 1:
            head = f"{f.bound[0].name} : {f.bound[0].sort.name}"
        else:
            head = ", ".join(f"{v.name} : {v.sort.name}" for v in f.bound)
        s = f"{kw} {head} . {pretty_formula(f.body, 0)}"
        return f"({s})" if prec > 0 else s
    raise TypeError(f"pretty_formula: {f!r}")


def pretty_constrained(ct: ConstrainedTerm) -> str:
    return f"{pretty_term(ct.term, 5)} /\\ {pretty_formula(ct.constraint, 5)}"
