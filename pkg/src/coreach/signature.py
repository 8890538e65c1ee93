"""Signatures over a fixed Int/Bool builtin core: sort order, overloading, validation."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product

from .errors import IllTyped, UnknownSort
from .terms import App, BOOL, INT, Lit, Sort, Term, Var

# The builtin subsignature: SMT-LIB core symbols over Int and Bool.  Builtin
# constants are integer/boolean literals and are never enumerated as symbols.
BUILTIN_OPS: tuple[tuple[str, tuple[Sort, ...], Sort], ...] = (
    ("+", (INT, INT), INT),
    ("-", (INT, INT), INT),
    ("-", (INT,), INT),
    ("*", (INT, INT), INT),
    ("div", (INT, INT), INT),
    ("mod", (INT, INT), INT),
    ("<", (INT, INT), BOOL),
    ("<=", (INT, INT), BOOL),
    (">", (INT, INT), BOOL),
    (">=", (INT, INT), BOOL),
    ("=", (INT, INT), BOOL),
    ("=", (BOOL, BOOL), BOOL),
    ("and", (BOOL, BOOL), BOOL),
    ("or", (BOOL, BOOL), BOOL),
    ("not", (BOOL,), BOOL),
    ("true", (), BOOL),
    ("false", (), BOOL),
)

BUILTIN_NAMES = {name for name, _, _ in BUILTIN_OPS}


@dataclass(frozen=True, slots=True)
class Operation:
    name: str
    arg_sorts: tuple[Sort, ...]
    result: Sort
    builtin: bool = False

    @property
    def arity(self) -> int:
        return len(self.arg_sorts)


@dataclass
class Violation:
    kind: str  # monotonicity | preregularity | builtin-overlap | uninhabited | builtin-result
    detail: str

    def __str__(self) -> str:
        return f"{self.kind}: {self.detail}"


@dataclass
class Signature:
    """An order-sorted signature containing the Int/Bool builtin subsignature.

    Immutable by convention after `validate` admits it; shared read-only use
    is safe.
    """

    sorts: dict[str, Sort] = field(default_factory=dict)
    subsort_pairs: set[tuple[str, str]] = field(default_factory=set)  # (sub, super), declared
    operations: list[Operation] = field(default_factory=list)
    variables: dict[str, Sort] = field(default_factory=dict)

    def __post_init__(self):
        if "Int" not in self.sorts:
            self.sorts["Int"] = INT
            self.sorts["Bool"] = BOOL
            for name, args, res in BUILTIN_OPS:
                self.operations.append(Operation(name, args, res, builtin=True))

    # -- declaration helpers (used by the frontend and tests) ----------------

    def add_sort(self, name: str) -> Sort:
        if name in self.sorts:
            return self.sorts[name]
        s = Sort(name)
        self.sorts[name] = s
        return s

    def add_subsort(self, sub: str, sup: str) -> None:
        for n in (sub, sup):
            if n not in self.sorts:
                raise UnknownSort(n)
        self.subsort_pairs.add((sub, sup))

    def add_operation(self, name: str, arg_sorts: list[Sort], result: Sort) -> Operation:
        op = Operation(name, tuple(arg_sorts), result)
        self.operations.append(op)
        return op

    def add_variable(self, name: str, sort: Sort) -> Var:
        self.variables[name] = sort
        return Var(name, sort)

    # -- sort order -----------------------------------------------------------

    def is_subsort(self, s1: Sort, s2: Sort) -> bool:
        """Reflexive-transitive closure of the declared subsort pairs."""
        for s in (s1, s2):
            if self.sorts.get(s.name) != s:
                raise UnknownSort(s.name)
        if s1 == s2:
            return True
        seen = {s1.name}
        stack = [s1.name]
        while stack:
            cur = stack.pop()
            for sub, sup in self.subsort_pairs:
                if sub == cur and sup not in seen:
                    if sup == s2.name:
                        return True
                    seen.add(sup)
                    stack.append(sup)
        return False

    def leq_word(self, w1: tuple[Sort, ...], w2: tuple[Sort, ...]) -> bool:
        return len(w1) == len(w2) and all(self.is_subsort(a, b) for a, b in zip(w1, w2))

    def connected(self, s1: Sort, s2: Sort) -> bool:
        """Same component of the subsort order (symmetric-transitive closure)."""
        if s1 == s2:
            return True
        rel = {(a, b) for a, b in self.subsort_pairs} | {(b, a) for a, b in self.subsort_pairs}
        seen = {s1.name}
        stack = [s1.name]
        while stack:
            cur = stack.pop()
            for a, b in rel:
                if a == cur and b not in seen:
                    if b == s2.name:
                        return True
                    seen.add(b)
                    stack.append(b)
        return False

    # -- overload resolution ---------------------------------------------------

    def overloads(self, name: str) -> list[Operation]:
        return [op for op in self.operations if op.name == name]

    def resolve(self, name: str, arg_sorts: tuple[Sort, ...]) -> Operation:
        """Least applicable overload for the given argument sorts."""
        applicable = [
            op
            for op in self.overloads(name)
            if op.arity == len(arg_sorts) and self.leq_word(arg_sorts, op.arg_sorts)
        ]
        if not applicable:
            raise IllTyped(f"no overload of {name} accepts {tuple(s.name for s in arg_sorts)}")
        least = applicable[0]
        for op in applicable[1:]:
            if self.is_subsort(op.result, least.result):
                least = op
        for op in applicable:
            if not self.is_subsort(least.result, op.result):
                raise IllTyped(f"{name} has no least result sort for {arg_sorts}")
        return least

    def make_app(self, name: str, args: tuple[Term, ...]) -> App:
        op = self.resolve(name, tuple(self.least_sort(a) for a in args))
        return App(name, args, op.result)

    def least_sort(self, t: Term) -> Sort:
        if isinstance(t, Var):
            return t.sort
        if isinstance(t, Lit):
            return t.sort
        return self.resolve(t.symbol, tuple(self.least_sort(a) for a in t.args)).result

    def is_builtin_symbol(self, name: str, arity: int) -> bool:
        return any(op.builtin and op.arity == arity for op in self.overloads(name))

    def is_constructor_term(self, t: Term) -> bool:
        """Headed by a non-builtin symbol."""
        return isinstance(t, App) and not any(op.builtin for op in self.overloads(t.symbol))

    # -- validation --------------------------------------------------------------

    def validate(self) -> list[Violation]:
        """Every violated admission condition; empty iff the signature is admitted."""
        out: list[Violation] = []
        user_ops = [op for op in self.operations if not op.builtin]

        for op in user_ops:
            if op.name in BUILTIN_NAMES and self.is_builtin_symbol(op.name, op.arity):
                out.append(Violation("builtin-overlap", f"user symbol {op.name}/{op.arity} clashes with a builtin"))
            if any(self.is_subsort(op.result, b) for b in (INT, BOOL)):
                out.append(
                    Violation("builtin-result", f"{op.name} constructs into builtin sort {op.result.name}")
                )

        by_name: dict[tuple[str, int], list[Operation]] = {}
        for op in self.operations:
            by_name.setdefault((op.name, op.arity), []).append(op)

        for (name, _arity), ops in sorted(by_name.items()):
            for a in ops:
                for b in ops:
                    if a is not b and self.leq_word(a.arg_sorts, b.arg_sorts):
                        if not self.is_subsort(a.result, b.result):
                            out.append(
                                Violation(
                                    "monotonicity",
                                    f"{name}: {a.arg_sorts} -> {a.result} vs {b.arg_sorts} -> {b.result}",
                                )
                            )
            out.extend(self._preregularity(name, ops))

        inhabited = self._inhabited_sorts()
        for s in sorted(self.sorts.values(), key=lambda x: x.name):
            if not s.builtin and s.name not in inhabited:
                out.append(Violation("uninhabited", f"sort {s.name} has no ground constructor term"))
        return out

    def _preregularity(self, name: str, ops: list[Operation]) -> list[Violation]:
        # Bounded check: for every argument-sort tuple at a declared arity, the
        # set of applicable overloads must admit a least result sort.
        out = []
        arities = {op.arity for op in ops}
        all_sorts = sorted(self.sorts.values(), key=lambda s: s.name)
        for n in arities:
            cands = [op for op in ops if op.arity == n]
            for word in product(all_sorts, repeat=n):
                applicable = [op for op in cands if self.leq_word(word, op.arg_sorts)]
                if not applicable:
                    continue
                results = [op.result for op in applicable]
                if not any(all(self.is_subsort(r, other) for other in results) for r in results):
                    out.append(
                        Violation(
                            "preregularity",
                            f"{name} at {tuple(s.name for s in word)} has no least result sort",
                        )
                    )
                    break
        return out

    def _inhabited_sorts(self) -> set[str]:
        done = set()
        for s in self.sorts.values():
            if any(self.is_subsort(b, s) for b in (INT, BOOL)):
                done.add(s.name)
        changed = True
        while changed:
            changed = False
            for op in self.operations:
                if op.builtin:
                    continue
                if all(a.name in done for a in op.arg_sorts):
                    for s in self.sorts.values():
                        if s.name not in done and self.is_subsort(op.result, s):
                            done.add(s.name)
                            changed = True
        return done


def validate_signature(sig: Signature) -> list[Violation]:
    return sig.validate()
