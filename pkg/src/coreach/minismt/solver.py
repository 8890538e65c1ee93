"""SMT-LIB script interpretation: model search for sat, refutation for unsat.

Formulas are kept in negation normal form.  Atoms hold term trees; they are
lowered to polynomial constraints only when asserted into a refutation core.
Quantifier evaluation during model search derives finite candidate ranges
from the atoms that bound the quantified variable; when no finite range is
implied the result degrades to unknown, never to a wrong verdict.
"""

from __future__ import annotations

import time
from itertools import product

from .arith import (
    EQ0,
    LE0,
    NE0,
    Core,
    const_of,
    euclid_div,
    euclid_mod,
    freeze,
    is_const,
    padd,
    pconst,
    pmul,
    pneg,
    poly_keys,
    pscale,
    psub,
    pvar,
    thaw,
)
from .sexpr import parse_all

MAX_INST_ROUNDS = 3
MAX_SPLITS = 3
MODEL_BOUNDS = (1, 2, 3, 4, 6, 8, 12, 16, 24, 32)
MODEL_EVAL_BUDGET = 200_000
REFUTE_STEP_BUDGET = 40_000
QRANGE_WIDTH_CAP = 4096
WINDOW = 24

INT, BOOLS = "Int", "Bool"


class Budget:
    def __init__(self, deadline: float, steps: int):
        self.deadline = deadline
        self.steps = steps

    def spend(self, n: int = 1) -> bool:
        self.steps -= n
        return self.steps < 0 or time.monotonic() > self.deadline


class SolveError(ValueError):
    pass


# -- terms and NNF formulas -------------------------------------------------------
#
# term   := ("int", k) | ("var", name) | (op, t1[, t2]) for op in + - * div mod
# nnf    := ("true",) | ("false",) | ("and", parts) | ("or", parts)
#         | ("cmp", "le"|"eq"|"ne", ta, tb) | ("bvar", name, pol)
#         | ("exists"|"forall", ((name, sort), ...), body)

ARITH_OPS = {"+", "-", "*", "div", "mod"}
CMP_OPS = {"<", "<=", ">", ">=", "="}


def to_term(sx, scope: dict):
    if isinstance(sx, bool):
        raise SolveError("boolean in integer position")
    if isinstance(sx, int):
        return ("int", sx)
    if isinstance(sx, str):
        if scope.get(sx) != INT:
            raise SolveError(f"unknown integer symbol {sx}")
        return ("var", sx)
    if isinstance(sx, list) and sx and sx[0] in ARITH_OPS:
        args = [to_term(a, scope) for a in sx[1:]]
        if sx[0] == "-" and len(args) == 1:
            return ("-", ("int", 0), args[0])
        if sx[0] in ("+", "*") and len(args) > 2:
            t = args[0]
            for a in args[1:]:
                t = (sx[0], t, a)
            return t
        if len(args) != 2:
            raise SolveError(f"bad arity for {sx[0]}")
        return (sx[0], args[0], args[1])
    raise SolveError(f"cannot read term {sx!r}")


def _cmp(op: str, ta, tb, pol: bool):
    """Normalize a comparison under a polarity to le/eq/ne atoms over Int."""
    plus1 = lambda t: ("+", t, ("int", 1))
    match (op, pol):
        case ("<=", True):
            return ("cmp", "le", ta, tb)
        case ("<=", False):
            return ("cmp", "le", plus1(tb), ta)
        case ("<", True):
            return ("cmp", "le", plus1(ta), tb)
        case ("<", False):
            return ("cmp", "le", tb, ta)
        case (">=", _):
            return _cmp("<=", tb, ta, pol)
        case (">", _):
            return _cmp("<", tb, ta, pol)
        case ("=", True):
            return ("cmp", "eq", ta, tb)
        case ("=", False):
            return ("cmp", "ne", ta, tb)
    raise SolveError(op)


def _sort_of(sx, scope: dict) -> str:
    if isinstance(sx, bool):
        return BOOLS
    if isinstance(sx, int):
        return INT
    if isinstance(sx, str):
        if sx in ("true", "false"):
            return BOOLS
        if sx in scope:
            return scope[sx]
        raise SolveError(f"unknown symbol {sx}")
    if isinstance(sx, list) and sx:
        if sx[0] in ARITH_OPS:
            return INT
        return BOOLS
    raise SolveError(f"cannot type {sx!r}")


def to_formula(sx, scope: dict, pol: bool):
    if sx is True or sx == "true":
        return ("true",) if pol else ("false",)
    if sx is False or sx == "false":
        return ("false",) if pol else ("true",)
    if isinstance(sx, str):
        if scope.get(sx) == BOOLS:
            return ("bvar", sx, pol)
        raise SolveError(f"unknown boolean symbol {sx}")
    if not isinstance(sx, list) or not sx:
        raise SolveError(f"cannot read formula {sx!r}")
    head = sx[0]
    if head == "not":
        return to_formula(sx[1], scope, not pol)
    if head in ("and", "or"):
        flip = (head == "and") == pol
        parts = tuple(to_formula(a, scope, pol) for a in sx[1:])
        return ("and" if flip else "or", parts)
    if head == "=>":
        a, b = sx[1], sx[2]
        if pol:
            return ("or", (to_formula(a, scope, False), to_formula(b, scope, True)))
        return ("and", (to_formula(a, scope, True), to_formula(b, scope, False)))
    if head in ("exists", "forall"):
        bound = tuple((b[0], b[1]) for b in sx[1])
        inner_scope = dict(scope)
        for name, srt in bound:
            if srt not in (INT, BOOLS):
                raise SolveError(f"unsupported sort {srt}")
            inner_scope[name] = srt
        body = to_formula(sx[2], inner_scope, pol)
        flip = (head == "exists") == pol
        return ("exists" if flip else "forall", bound, body)
    if head in CMP_OPS:
        if head == "=" and _sort_of(sx[1], scope) == BOOLS:
            a = to_formula(sx[1], scope, True)
            na = to_formula(sx[1], scope, False)
            b = to_formula(sx[2], scope, True)
            nb = to_formula(sx[2], scope, False)
            both = ("and", (a, b))
            neither = ("and", (na, nb))
            one = ("and", (a, nb))
            other = ("and", (na, b))
            return ("or", (both, neither)) if pol else ("or", (one, other))
        return _cmp(head, to_term(sx[1], scope), to_term(sx[2], scope), pol)
    raise SolveError(f"unsupported operator {head}")


def negate_nnf(node):
    tag = node[0]
    if tag == "true":
        return ("false",)
    if tag == "false":
        return ("true",)
    if tag == "and":
        return ("or", tuple(negate_nnf(p) for p in node[1]))
    if tag == "or":
        return ("and", tuple(negate_nnf(p) for p in node[1]))
    if tag == "bvar":
        return ("bvar", node[1], not node[2])
    if tag == "cmp":
        _, op, ta, tb = node
        if op == "eq":
            return ("cmp", "ne", ta, tb)
        if op == "ne":
            return ("cmp", "eq", ta, tb)
        return ("cmp", "le", ("+", tb, ("int", 1)), ta)
    if tag == "exists":
        return ("forall", node[1], negate_nnf(node[2]))
    if tag == "forall":
        return ("exists", node[1], negate_nnf(node[2]))
    raise SolveError(tag)


def subst_nnf(node, name: str, term):
    tag = node[0]
    if tag in ("true", "false"):
        return node
    if tag == "and" or tag == "or":
        return (tag, tuple(subst_nnf(p, name, term) for p in node[1]))
    if tag == "bvar":
        if node[1] != name:
            return node
        if term == ("bool", True):
            return ("true",) if node[2] else ("false",)
        if term == ("bool", False):
            return ("false",) if node[2] else ("true",)
        assert term[0] == "var"
        return ("bvar", term[1], node[2])
    if tag == "cmp":
        return ("cmp", node[1], _subst_term(node[2], name, term), _subst_term(node[3], name, term))
    if tag in ("exists", "forall"):
        if any(n == name for n, _ in node[1]):
            return node
        return (tag, node[1], subst_nnf(node[2], name, term))
    raise SolveError(tag)


def _subst_term(t, name: str, term):
    if t[0] == "int":
        return t
    if t[0] == "var":
        return term if t[1] == name else t
    return (t[0], *(_subst_term(a, name, term) for a in t[1:]))


def term_numerals(node) -> set[int]:
    out: set[int] = set()

    def walk_t(t):
        if t[0] == "int":
            out.add(t[1])
        elif t[0] != "var":
            for a in t[1:]:
                walk_t(a)

    def walk_f(n):
        tag = n[0]
        if tag in ("and", "or"):
            for p in n[1]:
                walk_f(p)
        elif tag == "cmp":
            walk_t(n[2])
            walk_t(n[3])
        elif tag in ("exists", "forall"):
            walk_f(n[2])

    walk_f(node)
    return out


# -- ground evaluation ---------------------------------------------------------


def eval_term(t, env: dict) -> int:
    tag = t[0]
    if tag == "int":
        return t[1]
    if tag == "var":
        return env[t[1]]
    a = eval_term(t[1], env)
    b = eval_term(t[2], env)
    match tag:
        case "+":
            return a + b
        case "-":
            return a - b
        case "*":
            return a * b
        case "div":
            return euclid_div(a, b)
        case "mod":
            return euclid_mod(a, b)
    raise SolveError(tag)


def eval_nnf(node, env: dict):
    """Three-valued truth: True, False, or None when a quantifier defeats us."""
    tag = node[0]
    if tag == "true":
        return True
    if tag == "false":
        return False
    if tag == "bvar":
        return env[node[1]] == node[2]
    if tag == "cmp":
        a, b = eval_term(node[2], env), eval_term(node[3], env)
        return {"le": a <= b, "eq": a == b, "ne": a != b}[node[1]]
    if tag in ("and", "or"):
        want_all = tag == "and"
        saw_none = False
        for p in node[1]:
            r = eval_nnf(p, env)
            if r is None:
                saw_none = True
            elif r is not want_all:
                return not want_all
        return None if saw_none else want_all
    if tag == "exists":
        return _eval_quant(node, env, want_witness=True)
    if tag == "forall":
        return _eval_quant(node, env, want_witness=False)
    raise SolveError(tag)


def _eval_quant(node, env: dict, want_witness: bool):
    tag, bound, body = node
    if not bound:
        return eval_nnf(body, env)
    (name, srt), rest = bound[0], bound[1:]
    inner = (tag, rest, body)
    if srt == BOOLS:
        vals, exhaustive = [False, True], True
    else:
        matrix = body if want_witness else negate_nnf(body)
        deeper = {n for n, _ in rest}
        vals, exhaustive = _candidates(name, matrix, env, deeper)
    saw_none = False
    for v in vals:
        env2 = dict(env)
        env2[name] = v
        r = eval_nnf(inner, env2)
        if r is want_witness:
            return want_witness
        if r is None:
            saw_none = True
    if exhaustive and not saw_none:
        return not want_witness
    return None


def _spine_atoms(node, skip: set[str]):
    """Atoms implied by the formula, ignoring anything under a variable in `skip`."""
    tag = node[0]
    if tag == "cmp":
        names = _term_names(node[2]) | _term_names(node[3])
        return [] if names & skip else [node]
    if tag == "and":
        out = []
        for p in node[1]:
            out.extend(_spine_atoms(p, skip))
        return out
    if tag in ("exists", "forall"):
        return _spine_atoms(node[2], skip | {n for n, _ in node[1]})
    return []


def _term_names(t) -> set[str]:
    if t[0] == "var":
        return {t[1]}
    if t[0] == "int":
        return set()
    out = set()
    for a in t[1:]:
        out |= _term_names(a)
    return out


def _linear_in(t, name: str, env: dict):
    """(a, c) with value = a*name + c under env, or None if not linear in name."""
    tag = t[0]
    if tag == "int":
        return (0, t[1])
    if tag == "var":
        if t[1] == name:
            return (1, 0)
        if t[1] in env:
            return (0, env[t[1]])
        return None
    la = _linear_in(t[1], name, env)
    lb = _linear_in(t[2], name, env)
    if la is None or lb is None:
        return None
    a1, c1 = la
    a2, c2 = lb
    match tag:
        case "+":
            return (a1 + a2, c1 + c2)
        case "-":
            return (a1 - a2, c1 - c2)
        case "*":
            if a1 == 0:
                return (c1 * a2, c1 * c2)
            if a2 == 0:
                return (a1 * c2, c1 * c2)
            return None
        case "div" | "mod":
            if a1 == 0 and a2 == 0:
                v = euclid_div(c1, c2) if tag == "div" else euclid_mod(c1, c2)
                return (0, v)
            return None
    return None


def _candidates(name: str, matrix, env: dict, deeper: set[str]):
    """Candidate values for a quantified integer variable, and exhaustiveness."""
    atoms = _spine_atoms(matrix, deeper)
    lo = hi = None
    eq_vals: set[int] | None = None
    empty = False
    for atom in atoms:
        _, op, ta, tb = atom
        la = _linear_in(ta, name, env)
        lb = _linear_in(tb, name, env)
        if la is None or lb is None:
            continue
        a = la[0] - lb[0]
        c = la[1] - lb[1]
        # atom is (a*name + c) op 0 with op over le/eq/ne after moving rhs left
        if op == "le":
            if a > 0:
                b = (-c) // a  # floor(-c/a)
                hi = b if hi is None else min(hi, b)
            elif a < 0:
                b = -((-c) // (-a))  # ceil(c/|a|)
                lo = b if lo is None else max(lo, b)
            elif c > 0:
                empty = True
        elif op == "eq":
            if a != 0:
                if (-c) % a == 0:
                    v = (-c) // a
                    eq_vals = {v} if eq_vals is None else (eq_vals & {v})
                else:
                    eq_vals = set()
            elif c != 0:
                empty = True
        # ne atoms do not bound
    if empty or (eq_vals is not None and not eq_vals):
        return [], True
    if eq_vals is not None:
        vals = sorted(eq_vals)
        if lo is not None:
            vals = [v for v in vals if v >= lo]
        if hi is not None:
            vals = [v for v in vals if v <= hi]
        return vals, True
    if lo is not None and hi is not None:
        if hi - lo > QRANGE_WIDTH_CAP:
            return list(range(lo, lo + QRANGE_WIDTH_CAP + 1)), False
        return list(range(lo, hi + 1)), True
    nums = term_numerals(matrix)
    window = set(range(-WINDOW, WINDOW + 1))
    for k in nums:
        window.update((k - 1, k, k + 1))
    if lo is not None:
        window = {v for v in window if v >= lo} | {lo, lo + 1}
    if hi is not None:
        window = {v for v in window if v <= hi} | {hi, hi - 1}
    return sorted(window), False


# -- model search ----------------------------------------------------------------


def model_search(tree, decls: dict[str, str], deadline: float, bounds_seq=MODEL_BOUNDS):
    names = sorted(decls)
    if not names:
        return eval_nnf(tree, {}), {}
    ints = [n for n in names if decls[n] == INT]
    bools = [n for n in names if decls[n] == BOOLS]
    budget = MODEL_EVAL_BUDGET
    prev = -1
    for b in bounds_seq:
        vals = _value_order(b)
        bool_choices = list(product([False, True], repeat=len(bools)))
        for ivals in product(vals, repeat=len(ints)):
            if max((abs(v) for v in ivals), default=0) <= prev:
                continue  # already tried at a smaller bound
            for bvals in bool_choices:
                budget -= 1
                if budget < 0 or time.monotonic() > deadline:
                    return None, None
                env = dict(zip(ints, ivals))
                env.update(zip(bools, bvals))
                if eval_nnf(tree, env) is True:
                    return True, env
        prev = b
    return None, None


def _value_order(b: int) -> list[int]:
    out = [0]
    for k in range(1, b + 1):
        out.extend((k, -k))
    return out


# -- refutation -------------------------------------------------------------------


def _poly_of_term(t):
    tag = t[0]
    if tag == "int":
        return pconst(t[1])
    if tag == "var":
        return pvar(("v", t[1]))
    pa = _poly_of_term(t[1])
    pb = _poly_of_term(t[2])
    match tag:
        case "+":
            return padd(pa, pb)
        case "-":
            return psub(pa, pb)
        case "*":
            return pmul(pa, pb)
        case "div" | "mod":
            if is_const(pa) and is_const(pb):
                f = euclid_div if tag == "div" else euclid_mod
                return pconst(f(const_of(pa), const_of(pb)))
            return pvar((tag, freeze(pa), freeze(pb)))
    raise SolveError(tag)


def _add_atom(core: Core, node):
    _, op, ta, tb = node
    p = psub(_poly_of_term(ta), _poly_of_term(tb))
    core.add(p, {"le": LE0, "eq": EQ0, "ne": NE0}[op])


def _poly_to_term(p):
    terms = []
    for m, c in sorted(p.items(), key=lambda kv: repr(kv[0])):
        t = ("int", c) if m == () else None
        for k in m:
            kt = _key_to_term(k)
            if kt is None:
                return None
            t = kt if t is None else ("*", t, kt)
        if m != () and c != 1:
            t = ("*", ("int", c), t)
        terms.append(t)
    if not terms:
        return ("int", 0)
    out = terms[0]
    for t in terms[1:]:
        out = ("+", out, t)
    return out


def _key_to_term(k):
    if k[0] == "v":
        return ("var", k[1])
    ta = _poly_to_term(thaw(k[1]))
    tb = _poly_to_term(thaw(k[2]))
    if ta is None or tb is None:
        return None
    return (k[0], ta, tb)


def _candidate_terms(core: Core, numerals: set[int]) -> list:
    """Ground instantiation candidates: variables first, then numerals, then
    the opaque div/mod terms of the branch."""
    plain, opaque = [], []
    for key in sorted(core.all_keys(), key=repr):
        t = _key_to_term(key)
        if t is None:
            continue
        (plain if key[0] == "v" else opaque).append(t)
    nums = [("int", k) for k in sorted(set(numerals) | {0, 1})]
    return (plain + nums[:8] + opaque)[:24]


def _flat_atoms(node, out):
    """Conjunction of literals, or None when the node branches or quantifies."""
    tag = node[0]
    if tag in ("true", "false", "cmp", "bvar"):
        out.append(node)
        return out
    if tag == "and":
        for p in node[1]:
            if _flat_atoms(p, out) is None:
                return None
        return out
    return None


def _probe_contradicts(core: Core, atoms) -> bool:
    """Cheap definite-contradiction test for unit propagation: each literal is
    normalized and checked against the core's indexes and against the other
    probe literals, with no cloning and no saturation."""
    from .arith import const_of, freeze, is_const, normalize_eq, normalize_le, pneg, psub

    local_best: dict = {}
    local_eqs: set = set()
    local_nes: set = set()
    local_bools: dict = {}
    for a in atoms:
        tag = a[0]
        if tag == "true":
            continue
        if tag == "false":
            return True
        if tag == "bvar":
            if core.bools.get(a[1], a[2]) != a[2] or local_bools.get(a[1], a[2]) != a[2]:
                return True
            local_bools[a[1]] = a[2]
            continue
        _, op, ta, tb = a
        try:
            p = core.apply_defs(psub(_poly_of_term(ta), _poly_of_term(tb)))
        except SolveError:
            continue
        if op == "le":
            np = normalize_le(p)
            if np is None:
                continue
            if is_const(np):
                if const_of(np) > 0:
                    return True
                continue
            nc = freeze({m: v for m, v in np.items() if m != ()})
            c0 = const_of(np)
            comp_key = freeze(pneg({m: v for m, v in np.items() if m != ()}))
            for table in (core.le_best, local_best):
                comp = table.get(comp_key)
                if comp is not None and c0 + comp > 0:
                    return True
            if c0 > local_best.get(nc, c0 - 1):
                local_best[nc] = c0
        else:
            np, bad = normalize_eq(p)
            if op == "eq":
                if bad:
                    return True
                if np is None:
                    continue
                if is_const(np):
                    if const_of(np) != 0:
                        return True
                    continue
                fp = freeze(np)
                if fp in core.nes or fp in local_nes:
                    return True
                nc = {m: v for m, v in np.items() if m != ()}
                e0 = const_of(np)
                for part, cc in ((nc, e0), (pneg(nc), -e0)):
                    comp = core.le_best.get(freeze(pneg(part)))
                    if comp is not None and cc + comp > 0:
                        return True
                local_eqs.add(fp)
            else:  # ne
                if np is None:
                    return True
                if is_const(np):
                    if const_of(np) == 0:
                        return True
                    continue
                fp = freeze(np)
                if fp in core.eqs or fp in local_eqs:
                    return True
                local_nes.add(fp)
    return False


def _definitely_true(core: Core, atoms) -> bool:
    """All atoms tautological under the core's definitions; such a clause
    constrains nothing and can be dropped."""
    from .arith import is_const, normalize_eq, normalize_le, psub

    for a in atoms:
        if a[0] == "true":
            continue
        if a[0] == "false":
            return False
        if a[0] == "bvar":
            if core.bools.get(a[1]) != a[2]:
                return False
            continue
        _, op, ta, tb = a
        p = core.apply_defs(psub(_poly_of_term(ta), _poly_of_term(tb)))
        if op == "le":
            if normalize_le(p) is not None:
                return False
        elif op == "eq":
            np, bad = normalize_eq(p)
            if bad or np is not None:
                return False
        else:  # ne
            if not (is_const(p) and const_of(p) != 0):
                return False
    return True


from functools import lru_cache


@lru_cache(maxsize=4096)
def _solve_candidates(node) -> list:
    """Instantiation candidates solved from the linear atoms of a quantified
    body: an atom a*x = t suggests x := t when a = ±1 and x := t div a
    otherwise (the usual equation trigger)."""
    bound_names = [nm for nm, srt in node[1] if srt == INT]
    out = []

    def scan(n):
        tag = n[0]
        if tag in ("and", "or"):
            for c in n[1]:
                scan(c)
        elif tag in ("exists", "forall"):
            scan(n[2])
        elif tag == "cmp":
            try:
                p = psub(_poly_of_term(n[2]), _poly_of_term(n[3]))
            except SolveError:
                return
            for nm in bound_names:
                key = ("v", nm)
                if any(key in m and (len(m) > 1 or m.count(key) > 1) for m in p):
                    continue
                mono = (key,)
                if mono not in p:
                    continue
                a = p[mono]
                rest = {m: c for m, c in p.items() if m != mono}
                if all(c % a == 0 for c in rest.values()):
                    t = _poly_to_term({m: -(c // a) for m, c in rest.items()})
                    if t is not None:
                        out.append(t)
                        continue
                if abs(a) > 1:
                    num = _poly_to_term(pneg(rest) if a > 0 else rest)
                    if num is not None:
                        out.append(("div", num, ("int", abs(a))))

    scan(node[2])
    seen = []
    for t in out:
        if t not in seen:
            seen.append(t)
    return seen[:4]


def _node_contradicts(core: Core, node, state, depth: int = 2) -> bool:
    """Definite refutation of a subformula against the core, without search:
    joint probing for literal conjunctions, all-disjuncts for or, and a
    single witnessing instance for universals (depth-capped)."""
    atoms = _flat_atoms(node, [])
    if atoms is not None:
        return _probe_contradicts(core, atoms)
    tag = node[0]
    if tag == "or":
        return all(_node_contradicts(core, c, state, depth) for c in node[1])
    if tag == "and":
        return any(_node_contradicts(core, c, state, depth) for c in node[1])
    if tag == "forall" and depth > 0:
        bound, body = node[1], node[2]
        if any(srt == BOOLS for _, srt in bound):
            return False
        cands = _solve_candidates(node) + _candidate_terms(core, state["numerals"])[:12]
        for combo in product(cands, repeat=len(bound)):
            inst = body
            for (nm, _), c in zip(bound, combo):
                inst = subst_nnf(inst, nm, c)
            if _node_contradicts(core, inst, state, depth - 1):
                return True
    return False


def refute(items, core: Core, universals, budget: Budget, state) -> bool:
    """True iff every branch closes; False means this engine cannot tell."""
    items = list(items)
    universals = list(universals)
    while items:
        if budget.spend():
            return False
        # Units, quantifiers, and conjunctions first; disjunctions last.
        pick = next((i for i in range(len(items) - 1, -1, -1) if items[i][0] != "or"), None)
        node = items.pop() if pick is None else items.pop(pick)
        tag = node[0]
        if tag == "true":
            continue
        if tag == "false":
            return True
        if tag == "and":
            items.extend(node[1])
            continue
        if tag == "or":
            alive = []
            satisfied = False
            for alt in node[1]:
                atoms = _flat_atoms(alt, [])
                if atoms is not None:
                    if _definitely_true(core, atoms):
                        satisfied = True  # the clause holds already: no information
                        break
                    if _probe_contradicts(core, atoms):
                        continue
                elif _node_contradicts(core, alt, state):
                    continue
                alive.append(alt)
            if satisfied:
                continue
            if not alive:
                return True
            if len(alive) == 1:
                items.append(alive[0])
                continue
            for alt in alive:
                sub = core.clone()
                st = dict(state)
                st["done"] = set(state["done"])
                if not refute(items + [alt], sub, universals, budget, st):
                    return False
            return True
        if tag == "exists":
            body = node[2]
            for nm, _srt in node[1]:
                fresh = f"$sk{state['sk'][0]}"
                state["sk"][0] += 1
                body = subst_nnf(body, nm, ("var", fresh))
            items.append(body)
            continue
        if tag == "forall":
            universals.append(node)
            continue
        if tag == "bvar":
            core.add_bool(node[1], node[2])
            if core.closed:
                return True
            continue
        if tag == "cmp":
            _add_atom(core, node)
            if core.closed:
                return True
            continue
        raise SolveError(tag)

    core.saturate()
    if core.closed:
        return True

    # An asserted universal with a single contradicting instance closes the
    # branch outright; probe before any clause-level instantiation.
    for u in universals:
        if _node_contradicts(core, u, state):
            return True

    # Heuristic quantifier instantiation with the branch's ground terms.
    if state["rounds"] > 0 and universals:
        cands = _candidate_terms(core, state["numerals"])
        insts = []
        for u in universals:
            bound, body = u[1], u[2]
            u_cands = _solve_candidates(u) + cands
            pools = [
                [("bool", False), ("bool", True)] if srt == BOOLS else u_cands for _, srt in bound
            ]
            for combo in product(*pools):
                sig = (u, combo)
                if sig in state["done"]:
                    continue
                state["done"].add(sig)
                inst = body
                for (nm, _), c in zip(bound, combo):
                    inst = subst_nnf(inst, nm, c)
                insts.append(inst)
                if len(insts) >= 64:
                    break
        if insts:
            st = dict(state)
            st["rounds"] = state["rounds"] - 1
            return refute(insts, core, universals, budget, st)

    # Case split on a product factor whose sign is undetermined.
    if state["splits"] > 0:
        bounds = core.bounds()
        for m in sorted(core._monos(), key=lambda x: (len(x), repr(x))):
            if len(m) < 2:
                continue
            for k in m:
                lo, hi = bounds.get((k,), (None, None))
                if lo is not None and (lo >= 2 or (lo >= 0 and hi is not None and hi <= 1)):
                    continue
                if hi is not None and hi <= 0:
                    continue
                kp = pvar(k)
                cases = (
                    (kp, LE0),  # k <= 0
                    (psub(kp, pconst(1)), EQ0),  # k = 1
                    (psub(pconst(2), kp), LE0),  # k >= 2
                )
                ok = True
                for cp, rel in cases:
                    sub = core.clone()
                    sub.add(cp, rel)
                    st = dict(state)
                    st["done"] = set(state["done"])
                    st["splits"] = state["splits"] - 1
                    if not refute([], sub, universals, budget, st):
                        ok = False
                        break
                if ok:
                    return True

    # Disequality split, last resort: p != 0 becomes p <= -1 or p >= 1.
    if state["splits"] > 0:
        for ne in sorted(core.nes, key=repr):
            p = thaw(ne)
            ok = True
            for shifted in (padd(p, pconst(1)), padd(pneg(p), pconst(1))):
                sub = core.clone()
                sub.nes.discard(ne)
                sub.add(shifted, LE0)
                st = dict(state)
                st["done"] = set(state["done"])
                st["splits"] = state["splits"] - 1
                if not refute([], sub, universals, budget, st):
                    ok = False
                    break
            if ok:
                return True
            break
    return False


# -- script driver -----------------------------------------------------------------


def check_formula(assertions, decls: dict[str, str], timeout_s: float):
    scope = dict(decls)
    tree = ("and", tuple(to_formula(a, scope, True) for a in assertions))
    deadline = time.monotonic() + timeout_s

    # Phase 1: cheap model scan, sized down as the variable count grows.
    n_ints = sum(1 for s in decls.values() if s == INT)
    cheap_cap = {0: 16, 1: 16, 2: 12, 3: 6, 4: 4}.get(n_ints, 2)
    cheap = tuple(b for b in MODEL_BOUNDS if b <= cheap_cap)
    verdict, env = model_search(tree, decls, deadline, cheap)
    if verdict is True:
        return "sat", env
    if verdict is False:
        return "unsat", None

    # Phase 2: refutation, leaving time for a deeper model scan afterwards.
    remaining = deadline - time.monotonic()
    budget = Budget(time.monotonic() + max(0.1, remaining * 0.6), REFUTE_STEP_BUDGET)
    state = {
        "sk": [0],
        "rounds": MAX_INST_ROUNDS,
        "splits": MAX_SPLITS,
        "done": set(),
        "numerals": term_numerals(tree),
    }
    core = Core(budget)
    if refute([tree], core, [], budget, state):
        return "unsat", None

    # Phase 3: a deeper model scan with whatever time is left.
    deep = tuple(b for b in MODEL_BOUNDS if b > cheap_cap)
    if deep:
        verdict, env = model_search(tree, decls, deadline, deep)
        if verdict is True:
            return "sat", env
    return "unknown", None


def run_script(text: str, timeout_s: float = 30.0) -> list[str]:
    forms = parse_all(text)
    decls: dict[str, str] = {}
    assertions = []
    out: list[str] = []
    model: dict | None = None
    for form in forms:
        if not isinstance(form, list) or not form:
            raise SolveError(f"bad command {form!r}")
        cmd = form[0]
        if cmd in ("set-logic", "set-option", "set-info"):
            continue
        if cmd == "declare-const":
            decls[str(form[1])] = form[2]
        elif cmd == "declare-fun":
            if form[2] != []:
                raise SolveError("only constant declarations are supported")
            decls[str(form[1])] = form[3]
        elif cmd == "assert":
            assertions.append(form[1])
        elif cmd == "check-sat":
            verdict, model = check_formula(assertions, decls, timeout_s)
            out.append(verdict)
        elif cmd == "get-model":
            if model is None:
                out.append("(error \"no model\")")
            else:
                rows = []
                for name in sorted(decls):
                    v = model.get(name, 0 if decls[name] == INT else False)
                    sv = str(v).lower() if decls[name] == BOOLS else (str(v) if v >= 0 else f"(- {-v})")
                    rows.append(f"  (define-fun {_smt_sym(name)} () {decls[name]} {sv})")
                out.append("(\n" + "\n".join(rows) + "\n)")
        elif cmd == "exit":
            break
        else:
            raise SolveError(f"unsupported command {cmd}")
    return out


def solve_text(text: str, timeout_s: float = 30.0) -> str:
    return "\n".join(run_script(text, timeout_s))


def _smt_sym(name: str) -> str:
    import re

    if re.fullmatch(r"[A-Za-z0-9~!@$%^&*_\-+=<>.?/]+", name):
        return name
    return f"|{name}|"
