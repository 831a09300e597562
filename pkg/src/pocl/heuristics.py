"""Additive heuristic cost and estimated-effort tables, and plan ranking."""

from __future__ import annotations

import itertools
import math
from typing import Iterable, Mapping, NamedTuple

from .bindings import EMPTY, BindingSet
from .formulas import (
    EQUALITY,
    And,
    Exists,
    Forall,
    Literal,
    Or,
    is_variable,
    literal_text,
    restrict_times,
    simplify,
    substitute,
)
from .grounding import objects_of

INF = math.inf

RANKINGS = ("add", "add-r", "oc", "flaws")


class CostEffort(NamedTuple):
    cost: float
    effort: float

    def __add__(self, other):  # componentwise, not tuple concatenation
        return CostEffort(self.cost + other.cost, self.effort + other.effort)


ZERO = CostEffort(0, 0)
INITIAL = CostEffort(0, 1)
UNREACHABLE = CostEffort(INF, INF)

START_TIMES = frozenset({"s", "i"})


def endpoint_preconditions(action) -> dict[str, object]:
    """Preconditions that must be achieved before each effect endpoint fires."""
    if not action.durative:
        return {"e": action.precondition, "s": action.precondition}
    return {
        "s": simplify(restrict_times(action.precondition, START_TIMES)),
        "e": action.precondition,
    }


class HeuristicTable:
    """Literal and action-endpoint (cost, effort) pairs at fixpoint.

    Lookups fall back to the closed-world rule: a negative literal whose atom
    is not initially true costs nothing.
    """

    def __init__(self, init: frozenset, objects: Mapping[str, tuple] | None = None):
        self.init = init
        self.objects = objects or {}
        self.literals: dict[tuple, CostEffort] = {}
        self.actions: dict[tuple, CostEffort] = {}
        self._formula_memo: dict = {}
        self._by_predicate: dict[tuple, list] | None = None
        self._init_by_predicate: dict[str, list] | None = None

    def literal(self, key: tuple) -> CostEffort:
        pred, terms, positive = key
        if pred == EQUALITY:
            return INITIAL if (terms[0] == terms[1]) == positive else UNREACHABLE
        if ((pred, terms) in self.init) == positive:
            return INITIAL
        return self.literals.get(key, UNREACHABLE)

    def action(self, action, endpoint: str = "e") -> CostEffort:
        return self.actions.get((action.id, endpoint), UNREACHABLE)

    def formula(self, f) -> CostEffort:
        if isinstance(f, Literal):
            return self.literal(f.key)
        hit = self._formula_memo.get(f)
        if hit is None:
            hit = formula_cost(f, self)
            self._formula_memo[f] = hit
        return hit

    def dump_lines(self) -> list[str]:
        keys = set(self.literals)
        for pred, terms in self.init:
            keys.add((pred, terms, True))
        rows = []
        for key in keys:
            ce = self.literal(key)
            rows.append(f"{literal_text(key[0], key[1], key[2])} {_num(ce.cost)} {_num(ce.effort)}")
        return sorted(rows)

    # -- lifted lookups --------------------------------------------------
    def _index(self) -> None:
        by_pred: dict[tuple, list] = {}
        for (pred, terms, positive), ce in self.literals.items():
            by_pred.setdefault((pred, positive), []).append((terms, ce))
        init_pred: dict[str, list] = {}
        for pred, terms in self.init:
            init_pred.setdefault(pred, []).append(terms)
        self._by_predicate, self._init_by_predicate = by_pred, init_pred

    def lifted_literal(self, lit: Literal, b: BindingSet) -> CostEffort:
        """Cost of a literal whose variables range over their binding domains:
        the cheapest ground literal it can still be matched to."""
        terms = tuple(b.find(t) for t in lit.terms)
        if not any(is_variable(t) for t in terms):
            return self.literal((lit.predicate, terms, lit.positive))
        if lit.predicate == EQUALITY:
            return INITIAL if not b.distinct(*terms) else UNREACHABLE
        if self._by_predicate is None:
            self._index()
        init_matches = [t for t in self._init_by_predicate.get(lit.predicate, ()) if _matches(terms, t, b)]
        if lit.positive:
            best = INITIAL if init_matches else UNREACHABLE
        else:
            combos = 1
            for var in {t for t in terms if is_variable(t)}:
                dom = b.domain(var)
                combos *= len(dom) if dom is not None else 1 << 30
            best = INITIAL if len(init_matches) < combos else UNREACHABLE
        if best == INITIAL:
            return best
        for cand, ce in self._by_predicate.get((lit.predicate, lit.positive), ()):
            if ce < best and _matches(terms, cand, b):
                best = ce
        return best


def _matches(pattern: tuple, ground: tuple, b: BindingSet) -> bool:
    seen: dict[str, str] = {}
    for p, g in zip(pattern, ground):
        if is_variable(p):
            dom = b.domain(p)
            if dom is not None and g not in dom:
                return False
            if seen.setdefault(p, g) != g:
                return False
        elif p != g:
            return False
    return True


def _num(x) -> str:
    return "inf" if x == INF else str(x)


def formula_cost(f, table: HeuristicTable, b: BindingSet = EMPTY) -> CostEffort:
    """Conjunctions add, disjunctions take the cheapest disjunct (its effort
    too), existentials take the cheapest instantiation."""
    if isinstance(f, Literal):
        if b.is_empty() and f.is_ground():
            return table.literal(f.key)
        return table.lifted_literal(f, b)
    if isinstance(f, And):
        total = ZERO
        for p in f.parts:
            total = total + formula_cost(p, table, b)
            if total.cost == INF:
                return UNREACHABLE
        return total
    if isinstance(f, Or):
        best = UNREACHABLE
        for p in f.parts:
            ce = formula_cost(p, table, b)
            if ce < best:
                best = ce
        return best
    if isinstance(f, (Exists, Forall)):
        names = [v for v, _ in f.params]
        domains = [objects_of(table.objects, t) for _, t in f.params]
        results = (
            formula_cost(simplify(substitute(f.body, dict(zip(names, combo)))), table, b)
            for combo in itertools.product(*domains)
        )
        if isinstance(f, Exists):
            return min(results, default=UNREACHABLE)
        total = ZERO
        for ce in results:
            total = total + ce
        return total
    raise TypeError(f"not an NNF formula: {f!r}")


def build_table(actions: Iterable, init: frozenset, durative: bool = False, objects=None) -> HeuristicTable:
    """Relax to a fixpoint: a literal costs 0 if it holds initially, otherwise
    the cheapest achiever's endpoint cost plus its effect condition."""
    table = HeuristicTable(init, objects)
    plans = []
    for a in actions:
        pre = endpoint_preconditions(a) if durative else {"e": a.precondition}
        by_time: dict[str, list] = {}
        for eff in a.effects:
            by_time.setdefault(eff.time if durative else "e", []).append(eff)
        plans.append((a, pre, by_time))
    changed = True
    while changed:
        changed = False
        for a, pre, by_time in plans:
            for t, prec in pre.items():
                ce = formula_cost(prec, table)
                if ce.cost == INF:
                    continue
                ace = CostEffort(ce.cost + 1, ce.effort + 1)
                if ace < table.actions.get((a.id, t), UNREACHABLE):
                    table.actions[(a.id, t)] = ace
                for eff in by_time.get(t, ()):
                    val = ace + formula_cost(eff.condition, table)
                    key = eff.literal.key
                    if val < table.literals.get(key, UNREACHABLE):
                        table.literals[key] = val
                        changed = True
    return table


# ---------------------------------------------------------------------------
# plan ranking


def open_condition_cost(oc, plan, table: HeuristicTable) -> CostEffort:
    return formula_cost(oc.condition, table, plan.bindings)


def plan_heuristic(plan, table: HeuristicTable, mode: str = "add") -> tuple[float, float]:
    """(h, effort) of a partial plan; h is infinite if some open condition is."""
    from .plans import can_reuse

    if mode not in RANKINGS:
        raise ValueError(f"unknown ranking {mode!r}")
    h = 0
    effort = 0
    ground = not plan.ctx.lifted
    for oc in plan.open_conds:
        cond = oc.condition
        if ground and isinstance(cond, Literal):
            ce = table.literal(cond.key)
        else:
            ce = open_condition_cost(oc, plan, table)
        effort += ce.effort
        cost = ce.cost
        if mode == "add-r" and cost > 0 and can_reuse(plan, oc):
            cost = 0
        if cost == INF:
            return INF, INF
        h += cost
    if mode == "oc":
        h = len(plan.open_conds)
    elif mode == "flaws":
        h = len(plan.open_conds) + len(plan.unsafes)
    return h, effort


def rank_plan(plan, table: HeuristicTable, mode: str = "add") -> tuple[float, float]:
    """(f, effort) with f = g + h; g counts non-dummy actions."""
    h, effort = plan_heuristic(plan, table, mode)
    return plan.num_steps + h, effort
