"""Reachability proving for logically constrained term rewriting systems."""

__version__ = "0.1.0"
