"""Command-line driver.

    coreach prove FILE        run the prover on every goal in the file
    coreach derive FILE --term "t /\\ phi"   print the symbolic successors
    coreach oracle FILE       brute-force the goals on a finite domain
    coreach check-graph FILE  export the reachable transition graph
    coreach validate FILE     signature and spec checks only

Exit codes: 0 proved/valid, 1 failure, 2 inconclusive, 3 input error.
"""

from __future__ import annotations

import argparse
import sys
from itertools import product

from .errors import CoreachError, ParseError
from .formulas import ConstrainedTerm, pretty_constrained, pretty_term, subst_formula
from .oracle import (
    Domain,
    build_graph,
    check_dvp,
    edge_list,
    enumerate_instances,
    sort_values,
    to_dot,
)
from .prover import FAILED, PROVED, Prover, SearchConfig, check_guarded, render_json, render_text
from .rewriting import derivatives
from .smt import DEFAULT_TIMEOUT_MS, SolverConfig, resolve_solver
from .specfile import SpecFile, parse_spec, parse_cterm_in
from .terms import FreshCounter, Lit, Substitution


def _common_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("file", help="specification file")
    p.add_argument("--solver", default=None, help="solver command (default: $RMT_SOLVER, z3, or builtin)")
    p.add_argument("--timeout-ms", type=int, default=None, help="per-query solver timeout")


def build_arg_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(prog="coreach", description=__doc__.splitlines()[0])
    sub = top.add_subparsers(dest="command", required=True)

    p = sub.add_parser("prove", help="prove the reachability goals")
    _common_flags(p)
    p.add_argument("--max-depth", type=int, default=None, help="derivative-step bound (default 20)")
    p.add_argument("--max-branch", type=int, default=None, help="branching bound (default 64)")
    p.add_argument("--enable-disj", action="store_true", help="allow per-goal case splits")
    p.add_argument("--dump-proof", choices=["text", "json"], default=None)

    p = sub.add_parser("derive", help="print the symbolic successors of a constrained term")
    _common_flags(p)
    p.add_argument("--term", required=True, help='constrained term, e.g. "init(n) /\\ n > 0"')

    p = sub.add_parser("oracle", help="check the goals by brute force on a finite domain")
    _common_flags(p)
    p.add_argument("--bound", type=int, default=None, help="integer domain bound (default 8)")
    p.add_argument("--steps", type=int, default=None, help="graph expansion budget (default 10000)")

    p = sub.add_parser("check-graph", help="build and export the reachable transition graph")
    _common_flags(p)
    p.add_argument("--bound", type=int, default=None)
    p.add_argument("--steps", type=int, default=None)
    p.add_argument("--dot", default=None, help="write a DOT document to this path")

    p = sub.add_parser("validate", help="parse and check the specification only")
    _common_flags(p)
    return top


def _load(path: str) -> SpecFile:
    with open(path, encoding="utf-8") as handle:
        return parse_spec(handle.read())


def _solver_config(args, spec: SpecFile) -> SolverConfig:
    timeout = args.timeout_ms or spec.options.get("timeout-ms") or DEFAULT_TIMEOUT_MS
    return resolve_solver(args.solver, timeout_ms=timeout)


def _pick(cli_value, spec: SpecFile, key: str, default):
    if cli_value is not None:
        return cli_value
    return spec.options.get(key, default)


def cmd_validate(args) -> int:
    spec = _load(args.file)
    violations = spec.signature.validate()
    for v in violations:
        print(f"violation: {v}", file=sys.stderr)
    n_rules = len(spec.system.rules)
    n_goals = len(spec.goals)
    print(f"{args.file}: {n_rules} rules, {n_goals} goals, {len(violations)} violations")
    return 0 if not violations else 1


def cmd_prove(args) -> int:
    spec = _load(args.file)
    violations = spec.signature.validate()
    if violations:
        for v in violations:
            print(f"violation: {v}", file=sys.stderr)
        return 3
    cfg = SearchConfig(
        max_der_depth=_pick(args.max_depth, spec, "max-depth", 20),
        max_branching=_pick(args.max_branch, spec, "max-branch", 64),
        solver=_solver_config(args, spec),
        enable_disj=args.enable_disj or bool(spec.options.get("enable-disj", False)),
    )
    prover = Prover(spec.system, spec.goal_set(), cfg)
    splits = {i: g.split for i, g in enumerate(spec.goals) if g.split is not None}
    result = prover.prove_all(splits)
    had_failure = False
    inconclusive = False
    for decl, res in zip(spec.goals, result.per_goal):
        label = f"{decl.kind} {pretty_constrained(decl.formula.lhs)} => {pretty_constrained(decl.formula.rhs)}"
        print(f"[{res.status}] {label}")
        if res.status == PROVED:
            if not check_guarded(res.tree):
                print("  WARNING: tree not guarded", file=sys.stderr)
            if args.dump_proof == "text":
                print(render_text(res.tree, indent=1))
            elif args.dump_proof == "json":
                print(render_json(res.tree))
        elif res.status == FAILED:
            had_failure = True
            for og in res.frontier:
                print(f"  open [{og.reason}]: {pretty_constrained(og.formula.lhs)}", file=sys.stderr)
        else:
            inconclusive = True
            print(f"  aborted: {res.detail}", file=sys.stderr)
    if had_failure:
        return 1
    if inconclusive:
        return 2
    return 0


def cmd_derive(args) -> int:
    spec = _load(args.file)
    ct = parse_cterm_in(spec, args.term)
    cfg = _solver_config(args, spec)
    for d in derivatives(spec.system, ct, FreshCounter(), cfg):
        print(pretty_constrained(d))
    return 0


def _goal_predicates(spec: SpecFile, goal, dom: Domain):
    """Instance sets of the two goal sides per shared-variable valuation."""
    sig = spec.signature
    shared = sorted(goal.formula.shared_vars(), key=lambda v: v.name)
    pools = [sort_values(sig, v.sort, dom) for v in shared]
    for combo in product(*pools):
        sigma = Substitution(
            {v: (Lit(c) if isinstance(c, (bool, int)) else c) for v, c in zip(shared, combo)}
        )
        lhs = ConstrainedTerm(sigma.apply(goal.formula.lhs.term), subst_formula(sigma, goal.formula.lhs.constraint))
        rhs = ConstrainedTerm(sigma.apply(goal.formula.rhs.term), subst_formula(sigma, goal.formula.rhs.constraint))
        yield enumerate_instances(sig, lhs, dom), enumerate_instances(sig, rhs, dom)


def cmd_oracle(args) -> int:
    spec = _load(args.file)
    dom = Domain(_pick(args.bound, spec, "bound", 8))
    steps = _pick(args.steps, spec, "steps", 10_000)
    worst = 0  # 0 valid, 1 inconclusive, 2 invalid
    for decl in spec.goals:
        verdicts = []
        for p, q in _goal_predicates(spec, decl, dom):
            if not p:
                continue
            graph = build_graph(spec.system, p, dom, steps)
            verdicts.append(check_dvp(graph, p, q))
        invalid = next((v for v in verdicts if v.kind == "invalid"), None)
        inconclusive = next((v for v in verdicts if v.kind == "inconclusive"), None)
        if invalid is not None:
            worst = max(worst, 2)
            path = " -> ".join(pretty_term(t) for t in invalid.path)
            print(f"[invalid] {decl.kind} goal: counterexample {path}")
        elif inconclusive is not None:
            worst = max(worst, 1)
            print(f"[inconclusive] {decl.kind} goal: frontier at {pretty_term(inconclusive.witness)}")
        else:
            print(f"[valid] {decl.kind} goal ({len(verdicts)} instantiations)")
    return {0: 0, 1: 2, 2: 1}[worst]


def cmd_check_graph(args) -> int:
    spec = _load(args.file)
    dom = Domain(_pick(args.bound, spec, "bound", 8))
    steps = _pick(args.steps, spec, "steps", 10_000)
    seeds = set()
    for decl in spec.goals:
        seeds |= enumerate_instances(spec.signature, decl.formula.lhs, dom)
    graph = build_graph(spec.system, frozenset(seeds), dom, steps)
    if args.dot:
        with open(args.dot, "w", encoding="utf-8") as handle:
            handle.write(to_dot(graph))
        print(f"wrote {args.dot} ({len(graph.nodes)} nodes)")
    else:
        print(edge_list(graph))
    print(
        f"# {len(graph.nodes)} nodes, {sum(len(s) for s in graph.edges.values())} edges, "
        f"{len(graph.frontier_exceeded)} frontier",
        file=sys.stderr,
    )
    return 0


def main(argv: list[str] | None = None) -> int:
    args = build_arg_parser().parse_args(argv)
    handlers = {
        "prove": cmd_prove,
        "derive": cmd_derive,
        "oracle": cmd_oracle,
        "check-graph": cmd_check_graph,
        "validate": cmd_validate,
    }
    try:
        return handlers[args.command](args)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except CoreachError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
