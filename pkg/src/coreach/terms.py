"""Order-sorted terms: variables, builtin literals, applications.

Terms are immutable values; equality is structural.  Applications cache the
result sort they were built with, so terms can travel without a signature
handle.  `Signature.least_sort` recomputes the exact least sort when subsort
refinement matters.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterator, Union

from .errors import InvalidPosition, SortMismatch


@dataclass(frozen=True, slots=True)
class Sort:
    name: str
    builtin: bool = False

    def __repr__(self) -> str:
        return self.name


INT = Sort("Int", builtin=True)
BOOL = Sort("Bool", builtin=True)


@dataclass(frozen=True, slots=True)
class Var:
    name: str
    sort: Sort

    def __repr__(self) -> str:
        return f"{self.name}:{self.sort.name}"


@dataclass(frozen=True, slots=True)
class Lit:
    value: Union[int, bool]

    @property
    def sort(self) -> Sort:
        return BOOL if isinstance(self.value, bool) else INT

    def __repr__(self) -> str:
        return str(self.value).lower() if isinstance(self.value, bool) else str(self.value)


@dataclass(frozen=True, slots=True)
class App:
    symbol: str
    args: tuple["Term", ...]
    sort: Sort

    def __repr__(self) -> str:
        if not self.args:
            return self.symbol
        return f"{self.symbol}({', '.join(map(repr, self.args))})"


Term = Union[Var, Lit, App]

# Child index sequence; () addresses the whole term.
Position = tuple[int, ...]


def subterm_at(t: Term, pos: Position) -> Term:
    for i in pos:
        if not isinstance(t, App) or i < 1 or i > len(t.args):
            raise InvalidPosition(f"no child {i} at {t!r}")
        t = t.args[i - 1]
    return t


def replace_at(t: Term, pos: Position, s: Term) -> Term:
    """Replace the subterm at `pos` by `s`; the new subterm must fit the slot sort."""
    if not pos:
        old = subterm_at(t, pos)
        if not _fits(s.sort, old.sort):
            raise SortMismatch(f"{s!r} of sort {s.sort} cannot replace {old!r}")
        return s
    if not isinstance(t, App) or pos[0] < 1 or pos[0] > len(t.args):
        raise InvalidPosition(f"no child {pos[0]} at {t!r}")
    i = pos[0] - 1
    new_args = list(t.args)
    new_args[i] = replace_at(t.args[i], pos[1:], s)
    return replace(t, args=tuple(new_args))


def _fits(new: Sort, old: Sort) -> bool:
    # Without the signature we can only compare names; exact subsort checks
    # happen in signature-aware callers.  Builtin slots never accept user sorts.
    if new == old:
        return True
    return not (old.builtin and not new.builtin) and not (new.builtin and not old.builtin)


def positions(t: Term) -> Iterator[Position]:
    """All positions of `t` in preorder."""
    yield ()
    if isinstance(t, App):
        for i, a in enumerate(t.args, start=1):
            for p in positions(a):
                yield (i, *p)


def non_variable_positions(t: Term) -> list[Position]:
    """Preorder positions whose subterm is an application or a literal."""
    return [p for p in positions(t) if not isinstance(subterm_at(t, p), Var)]


def term_vars(t: Term) -> set[Var]:
    if isinstance(t, Var):
        return {t}
    if isinstance(t, Lit):
        return set()
    out: set[Var] = set()
    for a in t.args:
        out |= term_vars(a)
    return out


def var_names(t: Term) -> set[str]:
    return {v.name for v in term_vars(t)}


@dataclass(frozen=True)
class Substitution:
    """Finite sort-respecting map from variables to terms; identity elsewhere."""

    mapping: dict[Var, Term]

    def __post_init__(self):
        for v, t in self.mapping.items():
            if v.sort.builtin and not t.sort.builtin:
                raise SortMismatch(f"{v!r} := {t!r} crosses the builtin boundary")

    @staticmethod
    def of(*pairs: tuple[Var, Term]) -> "Substitution":
        return Substitution({v: t for v, t in pairs if t != v})

    @property
    def domain(self) -> set[Var]:
        return set(self.mapping)

    def get(self, v: Var) -> Term:
        return self.mapping.get(v, v)

    def apply(self, t: Term) -> Term:
        if isinstance(t, Var):
            return self.mapping.get(t, t)
        if isinstance(t, Lit):
            return t
        return replace(t, args=tuple(self.apply(a) for a in t.args))

    def compose(self, inner: "Substitution") -> "Substitution":
        """self∘inner: apply `inner` first, then `self`."""
        out = {v: self.apply(t) for v, t in inner.mapping.items()}
        for v, t in self.mapping.items():
            if v not in out:
                out[v] = t
        return Substitution({v: t for v, t in out.items() if t != v})

    def __bool__(self) -> bool:
        return bool(self.mapping)


def apply_substitution(sigma: Substitution, t: Term) -> Term:
    return sigma.apply(t)


class FreshCounter:
    """Monotone index source for fresh variable names within one session."""

    __slots__ = ("next_index",)

    def __init__(self, start: int = 0):
        self.next_index = start

    def take(self) -> int:
        k = self.next_index
        self.next_index += 1
        return k


FRESH_SEP = "#"


def fresh_variant(v: Var, ctr: FreshCounter) -> Var:
    base = v.name.split(FRESH_SEP, 1)[0]
    return Var(f"{base}{FRESH_SEP}{ctr.take()}", v.sort)


def renaming_for(vs: set[Var], ctr: FreshCounter) -> Substitution:
    """Bijective fresh renaming of `vs`, deterministic in name order."""
    return Substitution({v: fresh_variant(v, ctr) for v in sorted(vs, key=lambda x: x.name)})
