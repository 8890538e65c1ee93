#!/usr/bin/env python3
"""Prove every system under systems/ and print a verdict/timing table.

    python scripts/run_corpus.py [--solver CMD] [--timeout-ms N]
"""

import argparse
import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from coreach.prover import PROVED, Prover, SearchConfig
from coreach.smt import resolve_solver
from coreach.specfile import parse_spec


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--solver", default=None)
    ap.add_argument("--timeout-ms", type=int, default=10_000)
    ap.add_argument("--systems", default="systems")
    args = ap.parse_args()

    solver = resolve_solver(args.solver, timeout_ms=args.timeout_ms)
    print(f"solver: {' '.join(solver.command)}")
    print(f"{'system':<18} {'goals':>5} {'proved':>6} {'time':>8}")
    failures = 0
    for path in sorted(Path(args.systems).glob("*.lrw")):
        spec = parse_spec(path.read_text())
        depth = spec.options.get("max-depth", 30)
        prover = Prover(spec.system, spec.goal_set(), SearchConfig(max_der_depth=depth, solver=solver))
        t0 = time.monotonic()
        result = prover.prove_all()
        dt = time.monotonic() - t0
        good = sum(1 for r in result.per_goal if r.status == PROVED)
        print(f"{path.stem:<18} {len(result.per_goal):>5} {good:>6} {dt:>7.2f}s")
        failures += len(result.per_goal) - good
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
