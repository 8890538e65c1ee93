"""Ground semantics on a finite integer domain: the brute-force cross-check.

Everything here is solver-free and deterministic.  Quantifiers in ground
formula evaluation range over the bounded domain [-B, B]; the documentation
and the test fixtures keep quantifier witnesses inside the bound.  Graph
construction marks every truncation (step budget, out-of-domain successors)
so validity checking can answer "inconclusive" instead of guessing.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from itertools import product

from .constraints import euclid_div, euclid_mod, fold_term
from .errors import MalformedPath, UnsupportedQuantifier
from .formulas import (
    And,
    Atom,
    ConstrainedTerm,
    Eq,
    Exists,
    FalseF,
    Forall,
    Formula,
    Iff,
    Implies,
    Not,
    Or,
    TrueF,
    free_vars,
)
from .rewriting import Lctrs
from .signature import Signature
from .terms import App, Lit, Term, Var, positions, replace_at, subterm_at

StatePredicate = frozenset  # of ground Terms


@dataclass(frozen=True)
class Domain:
    bound: int

    def __post_init__(self):
        if self.bound < 0:
            raise ValueError("domain bound must be nonnegative")

    def ints(self) -> range:
        return range(-self.bound, self.bound + 1)

    def contains_int(self, v: int) -> bool:
        return -self.bound <= v <= self.bound


@dataclass
class TransitionGraph:
    nodes: set[Term] = field(default_factory=set)
    edges: dict[Term, frozenset] = field(default_factory=dict)
    frontier_exceeded: set[Term] = field(default_factory=set)

    def is_irreducible(self, node: Term) -> bool:
        return not self.edges.get(node) and node not in self.frontier_exceeded

    def successors(self, node: Term) -> frozenset:
        return self.edges.get(node, frozenset())


def _key(t: Term) -> str:
    return repr(t)


# -- ground evaluation -------------------------------------------------------------


def eval_ground_term(sig: Signature, t: Term, val: dict[Var, object]):
    """Value of a term under a ground valuation: int, bool, or a ground term."""
    if isinstance(t, Var):
        return val[t]
    if isinstance(t, Lit):
        return t.value
    args = [eval_ground_term(sig, a, val) for a in t.args]
    if sig.is_builtin_symbol(t.symbol, len(t.args)):
        return _apply_builtin(t.symbol, args)
    return App(t.symbol, tuple(_as_term(a) for a in args), t.sort)


def _apply_builtin(symbol: str, vals: list):
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
            return vals[0] < vals[1]
        case "<=":
            return vals[0] <= vals[1]
        case ">":
            return vals[0] > vals[1]
        case ">=":
            return vals[0] >= vals[1]
        case "=":
            return vals[0] == vals[1]
        case "and":
            return vals[0] and vals[1]
        case "or":
            return vals[0] or vals[1]
        case "not":
            return not vals[0]
    raise ValueError(symbol)


def _as_term(v) -> Term:
    if isinstance(v, (bool, int)):
        return Lit(v)
    return v


def ground_instance(sig: Signature, t: Term, val: dict[Var, object]) -> Term:
    return _as_term(eval_ground_term(sig, t, val))


def sort_values(sig: Signature, sort, dom: Domain, _seen: frozenset = frozenset()):
    """All ground values of a sort with literals inside the domain."""
    if sort.builtin:
        if sort.name == "Bool":
            return [False, True]
        return list(dom.ints())
    if sort.name in _seen:
        raise UnsupportedQuantifier(f"sort {sort.name} is recursive")
    seen = _seen | {sort.name}
    out = []
    for op in sig.operations:
        if op.builtin or not sig.is_subsort(op.result, sort):
            continue
        pools = [sort_values(sig, a, dom, seen) for a in op.arg_sorts]
        for combo in product(*pools):
            out.append(App(op.name, tuple(_as_term(c) for c in combo), op.result))
    return out


def eval_formula(sig: Signature, f: Formula, val: dict[Var, object], dom: Domain) -> bool:
    """Truth under the bounded-domain semantics: quantifiers range over the
    domain only.  Sound for the fixtures, which keep witnesses in range."""
    if isinstance(f, TrueF):
        return True
    if isinstance(f, FalseF):
        return False
    if isinstance(f, Atom):
        v = eval_ground_term(sig, f.term, val)
        assert isinstance(v, bool)
        return v
    if isinstance(f, Eq):
        return eval_ground_term(sig, f.lhs, val) == eval_ground_term(sig, f.rhs, val)
    if isinstance(f, Not):
        return not eval_formula(sig, f.body, val, dom)
    if isinstance(f, And):
        return all(eval_formula(sig, p, val, dom) for p in f.parts)
    if isinstance(f, Or):
        return any(eval_formula(sig, p, val, dom) for p in f.parts)
    if isinstance(f, Implies):
        return (not eval_formula(sig, f.premise, val, dom)) or eval_formula(sig, f.conclusion, val, dom)
    if isinstance(f, Iff):
        return eval_formula(sig, f.lhs, val, dom) == eval_formula(sig, f.rhs, val, dom)
    if isinstance(f, (Exists, Forall)):
        want_any = isinstance(f, Exists)
        pools = [sort_values(sig, v.sort, dom) for v in f.bound]
        for combo in product(*pools):
            inner = dict(val)
            inner.update(zip(f.bound, combo))
            if eval_formula(sig, f.body, inner, dom) == want_any:
                return want_any
        return not want_any
    raise TypeError(f"eval_formula: {f!r}")


# -- state predicates ---------------------------------------------------------------


def enumerate_instances(sig: Signature, ct: ConstrainedTerm, dom: Domain) -> StatePredicate:
    """All ground instances of the term whose valuation satisfies the constraint."""
    vs = sorted(free_vars(ct), key=lambda v: v.name)
    pools = [sort_values(sig, v.sort, dom) for v in vs]
    out = set()
    for combo in product(*pools):
        val = dict(zip(vs, combo))
        if eval_formula(sig, ct.constraint, val, dom):
            out.add(ground_instance(sig, ct.term, val))
    return frozenset(out)


def in_domain(t: Term, dom: Domain) -> bool:
    if isinstance(t, Lit):
        return not isinstance(t.value, int) or dom.contains_int(t.value)
    if isinstance(t, App):
        return all(in_domain(a, dom) for a in t.args)
    return True


# -- the transition relation ----------------------------------------------------------


def _match(sig: Signature, pat: Term, g: Term, binding: dict[Var, object], deferred: list):
    """Structural match binding rule variables; builtin-operator subpatterns
    are deferred as equations checked after enumeration."""
    if isinstance(pat, Var):
        want = g.value if isinstance(g, Lit) else g
        if pat in binding:
            return binding[pat] == want
        if pat.sort.builtin != isinstance(g, Lit):
            return False
        if isinstance(g, Lit) and g.sort != pat.sort:
            return False
        if isinstance(g, App) and not sig.is_subsort(sig.least_sort(g), pat.sort):
            return False
        binding[pat] = want
        return True
    if isinstance(pat, Lit):
        return isinstance(g, Lit) and pat.value == g.value
    if sig.is_builtin_symbol(pat.symbol, len(pat.args)):
        if not isinstance(g, Lit):
            return False
        deferred.append((pat, g.value))
        return True
    if not isinstance(g, App) or g.symbol != pat.symbol or len(g.args) != len(pat.args):
        return False
    return all(_match(sig, p, a, binding, deferred) for p, a in zip(pat.args, g.args))


def ground_step(system: Lctrs, gamma: Term, dom: Domain) -> StatePredicate:
    """All one-step successors of a ground term: any rule, any position, any
    rule-variable valuation over the domain that satisfies the guard."""
    sig = system.signature
    out = set()
    for pos in positions(gamma):
        sub = subterm_at(gamma, pos)
        if isinstance(sub, Lit) or (isinstance(sub, App) and sig.least_sort(sub).builtin):
            continue  # builtin values are never rewritten
        for rule in system.rules:
            binding: dict[Var, object] = {}
            deferred: list = []
            if not _match(sig, rule.lhs, sub, binding, deferred):
                continue
            rest = sorted(
                (v for v in rule.variables() if v not in binding), key=lambda v: v.name
            )
            pools = [sort_values(sig, v.sort, dom) for v in rest]
            for combo in product(*pools):
                val = dict(binding)
                val.update(zip(rest, combo))
                if any(eval_ground_term(sig, p, val) != want for p, want in deferred):
                    continue
                if not eval_formula(sig, rule.guard, val, dom):
                    continue
                out.add(fold_term(replace_at(gamma, pos, ground_instance(sig, rule.rhs, val))))
    return frozenset(out)


def build_graph(system: Lctrs, seeds: StatePredicate, dom: Domain, step_bound: int) -> TransitionGraph:
    """Breadth-first closure of the step relation from the seeds; nodes whose
    expansion is cut off or whose successors leave the domain are recorded."""
    g = TransitionGraph()
    queue = deque(sorted(seeds, key=_key))
    g.nodes.update(seeds)
    expansions = 0
    while queue:
        node = queue.popleft()
        if node in g.edges:
            continue
        if expansions >= step_bound:
            g.frontier_exceeded.add(node)
            continue
        expansions += 1
        succs = ground_step(system, node, dom)
        kept = set()
        for s in sorted(succs, key=_key):
            if not in_domain(s, dom):
                g.frontier_exceeded.add(node)
                continue
            kept.add(s)
            if s not in g.nodes:
                g.nodes.add(s)
                queue.append(s)
        g.edges[node] = frozenset(kept)
    return g


# -- demonic validity ------------------------------------------------------------------


@dataclass(frozen=True)
class DvpResult:
    kind: str  # valid | invalid | inconclusive
    witness: Term | None = None
    path: tuple[Term, ...] = ()

    @property
    def is_valid(self) -> bool:
        return self.kind == "valid"


def check_dvp(g: TransitionGraph, p: StatePredicate, q: StatePredicate) -> DvpResult:
    """Greatest-fixed-point pruning: repeatedly remove states outside the
    target that are stuck or have a removed successor.  The predicate holds
    iff every starting state survives."""
    removed: dict[Term, object] = {}
    changed = True
    while changed:
        changed = False
        for node in sorted(g.nodes - set(removed), key=_key):
            if node in q:
                continue
            if g.is_irreducible(node):
                removed[node] = "stuck"
                changed = True
                continue
            bad = next((s for s in sorted(g.successors(node), key=_key) if s in removed), None)
            if bad is not None:
                removed[node] = bad
                changed = True
    for start in sorted(p, key=_key):
        if start in removed:
            path = [start]
            cur = start
            while removed.get(cur) != "stuck" and cur in removed:
                cur = removed[cur]
                path.append(cur)
            return DvpResult("invalid", start, tuple(path))
    # Every start survives; the verdict stands only if no run can reach a
    # truncated node before the target.
    seen = set()
    stack = [s for s in sorted(p, key=_key) if s not in q]
    while stack:
        node = stack.pop()
        if node in seen:
            continue
        seen.add(node)
        if node in g.frontier_exceeded:
            return DvpResult("inconclusive", node)
        for s in sorted(g.successors(node), key=_key):
            if s not in q and s not in seen:
                stack.append(s)
    return DvpResult("valid")


@dataclass(frozen=True)
class Path:
    stem: tuple[Term, ...]
    cycle: tuple[Term, ...] = ()

    @property
    def is_lasso(self) -> bool:
        return bool(self.cycle)


def path_satisfies(g: TransitionGraph, path: Path, p: StatePredicate, q: StatePredicate) -> bool:
    """Coinductive acceptance of one execution path: reach the target while
    the tracked predicate holds, or run forever."""
    _validate_path(g, path)
    pred = frozenset(p)
    idx = 0
    stem = list(path.stem)
    seen: set[tuple[int, frozenset]] = set()
    while True:
        if idx < len(stem):
            node = stem[idx]
        else:
            if not path.cycle:
                return False  # walked off a finite path without reaching the target
            cpos = (idx - len(stem)) % len(path.cycle)
            node = path.cycle[cpos]
            state = (cpos, pred)
            if state in seen:
                return True  # the lasso loops forever under the tracked predicate
            seen.add(state)
        if node not in pred:
            return False
        if node in q:
            return True
        if idx == len(stem) - 1 and not path.cycle:
            return False  # irreducible end not in the target
        pred = frozenset().union(*(g.successors(n) for n in pred)) if pred else frozenset()
        idx += 1


def _validate_path(g: TransitionGraph, path: Path) -> None:
    nodes = list(path.stem) + list(path.cycle)
    if not nodes:
        raise MalformedPath("empty path")
    for a, b in zip(nodes, nodes[1:]):
        if b not in g.successors(a):
            raise MalformedPath(f"{b!r} is not a successor of {a!r}")
    if path.cycle:
        if path.cycle[0] not in g.successors(nodes[-1]):
            raise MalformedPath("cycle does not close")
    else:
        if not g.is_irreducible(nodes[-1]):
            raise MalformedPath("finite path must end in an irreducible state")


# -- cross-checks -----------------------------------------------------------------------


@dataclass(frozen=True)
class DeltaReport:
    symbolic_only: StatePredicate
    ground_only: StatePredicate

    @property
    def ok(self) -> bool:
        return not self.symbolic_only and not self.ground_only


def check_derivative_theorem(system: Lctrs, ct: ConstrainedTerm, dom: Domain) -> DeltaReport:
    """Instances of the symbolic successors against the one-step image of the
    instances: the two must coincide exactly."""
    from .rewriting import derivatives
    from .terms import FreshCounter

    sig = system.signature
    sym = set()
    for d in derivatives(system, ct, FreshCounter(start=5_000_000)):
        sym |= enumerate_instances(sig, d, dom)
    ground = set()
    for inst in enumerate_instances(sig, ct, dom):
        ground |= ground_step(system, inst, dom)
    return DeltaReport(frozenset(sym - ground), frozenset(ground - sym))


# -- exports ------------------------------------------------------------------------------


def edge_list(g: TransitionGraph) -> str:
    from .formulas import pretty_term

    lines = []
    for node in sorted(g.nodes, key=_key):
        mark = " !frontier" if node in g.frontier_exceeded else ""
        succs = ", ".join(pretty_term(s) for s in sorted(g.successors(node), key=_key))
        lines.append(f"{pretty_term(node)} -> [{succs}]{mark}")
    return "\n".join(lines)


def to_dot(g: TransitionGraph, p: StatePredicate = frozenset(), q: StatePredicate = frozenset()) -> str:
    from .formulas import pretty_term

    names = {node: f"n{i}" for i, node in enumerate(sorted(g.nodes, key=_key))}
    lines = ["digraph states {"]
    for node, name in names.items():
        attrs = [f'label="{pretty_term(node)}"']
        if node in g.frontier_exceeded:
            attrs.append("style=dashed")
        if node in q:
            attrs.append("shape=doublecircle")
        elif node in p:
            attrs.append("shape=box")
        lines.append(f"  {name} [{', '.join(attrs)}];")
    for node, name in names.items():
        for s in sorted(g.successors(node), key=_key):
            lines.append(f"  {name} -> {names[s]};")
    lines.append("}")
    return "\n".join(lines)
