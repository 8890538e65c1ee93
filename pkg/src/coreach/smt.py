"""SMT backend: encode constraints to SMT-LIB 2 and drive an external solver.

One stateless solver run per query.  The solver is an external executable
(z3 by default) speaking SMT-LIB over stdin/stdout; the bundled pure-Python
solver serves as the fallback and can run either in-process (command
"builtin") or as a real subprocess (command "builtin-subprocess").
An unknown answer is always legal and callers must treat it conservatively.
"""

from __future__ import annotations

import os
import re
import shlex
import shutil
import subprocess
import sys
from dataclasses import dataclass
from enum import Enum

from .errors import MalformedSolverOutput, NonBuiltinResidue, SolverUnavailable
from .formulas import (
    And,
    Atom,
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
from .signature import Signature
from .terms import Lit, Term, Var

SOLVER_ENV_VAR = "RMT_SOLVER"
DEFAULT_TIMEOUT_MS = 5000


class Verdict(Enum):
    SAT = "sat"
    UNSAT = "unsat"
    UNKNOWN = "unknown"


class Validity(Enum):
    VALID = "valid"
    INVALID = "invalid"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class SmtResult:
    verdict: Verdict
    model: tuple[tuple[str, object], ...] | None = None


@dataclass(frozen=True)
class SolverConfig:
    command: tuple[str, ...] = ("builtin",)
    timeout_ms: int = DEFAULT_TIMEOUT_MS
    logic: str = "ALL"
    want_model: bool = False

    def __post_init__(self):
        if self.timeout_ms <= 0:
            raise ValueError("timeout must be positive")


def resolve_solver(spec: str | None = None, timeout_ms: int = DEFAULT_TIMEOUT_MS) -> SolverConfig:
    """Pick the solver: explicit flag, then RMT_SOLVER, then z3 if present,
    then the bundled fallback."""
    spec = spec or os.environ.get(SOLVER_ENV_VAR)
    if spec is None:
        spec = "z3" if shutil.which("z3") else "builtin"
    if spec in ("builtin", "builtin-subprocess"):
        return SolverConfig(command=(spec,), timeout_ms=timeout_ms)
    argv = tuple(shlex.split(spec))
    if argv and os.path.basename(argv[0]) == "z3" and "-in" not in argv:
        argv = argv + ("-in",)
    return SolverConfig(command=argv, timeout_ms=timeout_ms)


# -- encoding ---------------------------------------------------------------------

_SIMPLE_SYM = re.compile(r"[A-Za-z~!@$%^&*_+=<>.?/-][A-Za-z0-9~!@$%^&*_+=<>.?/-]*")


def _sym(name: str) -> str:
    if _SIMPLE_SYM.fullmatch(name):
        return name
    return f"|{name}|"


def _enc_term(sig: Signature, t: Term) -> str:
    if isinstance(t, Var):
        if not t.sort.builtin:
            raise NonBuiltinResidue(f"variable {t.name} of sort {t.sort.name}")
        return _sym(t.name)
    if isinstance(t, Lit):
        if isinstance(t.value, bool):
            return "true" if t.value else "false"
        return str(t.value) if t.value >= 0 else f"(- {-t.value})"
    if not sig.is_builtin_symbol(t.symbol, len(t.args)):
        raise NonBuiltinResidue(f"constructor {t.symbol} survived reduction")
    args = " ".join(_enc_term(sig, a) for a in t.args)
    return f"({t.symbol} {args})"


def _enc_formula(sig: Signature, f: Formula) -> str:
    if isinstance(f, TrueF):
        return "true"
    if isinstance(f, FalseF):
        return "false"
    if isinstance(f, Eq):
        return f"(= {_enc_term(sig, f.lhs)} {_enc_term(sig, f.rhs)})"
    if isinstance(f, Atom):
        return _enc_term(sig, f.term)
    if isinstance(f, Not):
        return f"(not {_enc_formula(sig, f.body)})"
    if isinstance(f, And):
        if not f.parts:
            return "true"
        return "(and " + " ".join(_enc_formula(sig, p) for p in f.parts) + ")"
    if isinstance(f, Or):
        if not f.parts:
            return "false"
        return "(or " + " ".join(_enc_formula(sig, p) for p in f.parts) + ")"
    if isinstance(f, Implies):
        return f"(=> {_enc_formula(sig, f.premise)} {_enc_formula(sig, f.conclusion)})"
    if isinstance(f, Iff):
        return f"(= {_enc_formula(sig, f.lhs)} {_enc_formula(sig, f.rhs)})"
    if isinstance(f, (Exists, Forall)):
        kw = "exists" if isinstance(f, Exists) else "forall"
        for v in f.bound:
            if not v.sort.builtin:
                raise NonBuiltinResidue(f"quantifier over {v.sort.name}")
        binders = " ".join(f"({_sym(v.name)} {v.sort.name})" for v in f.bound)
        return f"({kw} ({binders}) {_enc_formula(sig, f.body)})"
    raise TypeError(f"encode: {f!r}")


def encode(sig: Signature, f: Formula, cfg: SolverConfig = SolverConfig()) -> str:
    """Deterministic SMT-LIB 2 script: declarations, one assertion, check-sat."""
    body = _enc_formula(sig, f)
    lines = [f"(set-logic {cfg.logic})"]
    for v in sorted(free_vars(f), key=lambda v: v.name):
        if not v.sort.builtin:
            raise NonBuiltinResidue(f"variable {v.name} of sort {v.sort.name}")
        lines.append(f"(declare-const {_sym(v.name)} {v.sort.name})")
    lines.append(f"(assert {body})")
    lines.append("(check-sat)")
    if cfg.want_model:
        lines.append("(get-model)")
    return "\n".join(lines) + "\n"


# -- driving the solver -------------------------------------------------------------


def _run_solver(script: str, cfg: SolverConfig) -> str:
    timeout_s = cfg.timeout_ms / 1000.0
    if cfg.command == ("builtin",):
        from .minismt import run_script

        try:
            return "\n".join(run_script(script, timeout_s))
        except Exception as exc:
            raise MalformedSolverOutput(str(exc)) from exc
    if cfg.command == ("builtin-subprocess",):
        argv = [sys.executable, "-m", "coreach.minismt", str(timeout_s)]
    else:
        argv = list(cfg.command)
    try:
        proc = subprocess.run(
            argv,
            input=script,
            capture_output=True,
            text=True,
            timeout=timeout_s + 2.0,
        )
    except FileNotFoundError as exc:
        raise SolverUnavailable(f"cannot run {argv[0]}") from exc
    except subprocess.TimeoutExpired:
        return "unknown"
    return proc.stdout


def _parse_answer(output: str) -> tuple[Verdict, list[str]]:
    lines = [ln.strip() for ln in output.splitlines() if ln.strip()]
    if not lines:
        raise MalformedSolverOutput("empty solver output")
    first, rest = lines[0], lines[1:]
    if first == "sat":
        return Verdict.SAT, rest
    if first == "unsat":
        return Verdict.UNSAT, rest
    if first == "unknown" or first.startswith("(:reason-unknown"):
        return Verdict.UNKNOWN, rest
    raise MalformedSolverOutput(f"unrecognized answer {first!r}")


def _parse_model(lines: list[str]) -> tuple[tuple[str, object], ...] | None:
    from .minismt.sexpr import SexprError, parse_all

    try:
        forms = parse_all("\n".join(lines))
    except SexprError:
        return None
    out = []
    stack = list(forms)
    while stack:
        form = stack.pop(0)
        if not isinstance(form, list):
            continue
        if form and form[0] == "define-fun" and len(form) >= 5:
            name, value = form[1], form[4]
            if isinstance(value, list) and len(value) == 2 and value[0] == "-":
                value = -value[1]
            if value in ("true", "false"):
                value = value == "true"
            out.append((str(name), value))
        elif form and form[0] == "model":
            stack = form[1:] + stack
        else:
            stack = [x for x in form if isinstance(x, list)] + stack
    return tuple(sorted(out)) if out else None


def check_sat(sig: Signature, f: Formula, cfg: SolverConfig) -> SmtResult:
    """Satisfiability of f in the builtin model; timeout degrades to unknown."""
    script = encode(sig, f, cfg)
    output = _run_solver(script, cfg)
    verdict, rest = _parse_answer(output)
    model = _parse_model(rest) if cfg.want_model and verdict == Verdict.SAT else None
    return SmtResult(verdict, model)


def check_valid(sig: Signature, f: Formula, cfg: SolverConfig) -> tuple[Validity, SmtResult]:
    """Validity via unsatisfiability of the negation; returns both views."""
    neg = Not(f)
    res = check_sat(sig, neg, cfg)
    if res.verdict == Verdict.UNSAT:
        return Validity.VALID, res
    if res.verdict == Verdict.SAT:
        return Validity.INVALID, res
    return Validity.UNKNOWN, res
