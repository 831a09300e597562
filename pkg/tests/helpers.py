"""Shared utilities for driving partial plans in tests."""

from __future__ import annotations

import random

from pocl.heuristics import INF, rank_plan
from pocl.plans import apply_candidate, candidates, make_initial_plan


def random_plans(ctx, rng: random.Random, walks: int, depth: int):
    """Plans reached by random refinement walks from the initial plan.

    Plans ranked infinite are skipped, as the search would never keep them.
    """
    for _ in range(walks):
        plan = make_initial_plan(ctx)
        yield plan
        for _ in range(depth):
            flaws = plan.flaws
            if not flaws:
                break
            flaw = rng.choice(flaws)
            options = candidates(plan, flaw)
            if not options:
                break
            plan = apply_candidate(plan, flaw, rng.choice(options))
            if rank_plan(plan, ctx.table, "add")[0] == INF:
                break
            yield plan


def refine(plan, flaw_text: str, choose=lambda c: True):
    """Apply the first candidate accepted by ``choose`` to the flaw printed as
    ``flaw_text``."""
    flaw = next(f for f in plan.flaws if str(f) == flaw_text)
    cand = next(c for c in candidates(plan, flaw) if choose(c))
    return apply_candidate(plan, flaw, cand)
