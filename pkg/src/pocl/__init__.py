"""Partial-order causal-link planning with temporal constraints."""

from __future__ import annotations

from .flaws import PRESETS, FlawStrategy, parse_strategy
from .pddl import PDDLError, parse_domain, parse_problem
from .search import BudgetExhausted, Failure, Solution, astar, prepare, solve

__all__ = [
    "PRESETS",
    "BudgetExhausted",
    "Failure",
    "FlawStrategy",
    "PDDLError",
    "Solution",
    "astar",
    "parse_domain",
    "parse_problem",
    "parse_strategy",
    "prepare",
    "solve",
]
