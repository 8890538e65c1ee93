"""A small SMT-LIB 2 solver for quantified integer/boolean constraints.

Decides the fragment this package emits: model search certifies sat,
a refutation engine (linear arithmetic over monomials, div/mod axioms,
quantifier instantiation, bounded case splits) certifies unsat, and
everything else is unknown.  Runs standalone as `python -m coreach.minismt`.
"""

from .solver import run_script, solve_text

__all__ = ["run_script", "solve_text"]
