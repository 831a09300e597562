"""Flaw selection strategies: notation parser, flaw classification and selection."""

from __future__ import annotations

import random
import re
from dataclasses import dataclass

from .heuristics import formula_cost
from .plans import (
    OpenCondition,
    Plan,
    Unsafe,
    count_refinements,
    is_static,
    is_unsafe_condition,
    resolvable_by_new_action,
    separable,
)

FLAW_TYPES = frozenset("nsotlu")
THREAT_TYPES = frozenset("ns")
OC_TYPES = frozenset("otlu")
ORDERINGS = ("LIFO", "FIFO", "R", "LR", "New", "MC", "LC", "MW", "LW")
HEURISTIC_ORDERINGS = frozenset({"MC", "LC", "MW", "LW"})
OC_ONLY_ORDERINGS = HEURISTIC_ORDERINGS | {"New"}


class StrategyError(ValueError):
    pass


@dataclass(frozen=True)
class SelectionCriterion:
    types: frozenset
    ordering: str
    bound: int | None = None

    def __str__(self) -> str:
        types = ",".join(t for t in "nsotlu" if t in self.types)
        bound = "" if self.bound is None else f"<={self.bound} "
        name = f"{self.ordering}_add" if self.ordering in HEURISTIC_ORDERINGS else self.ordering
        return f"{{{types}}}{bound}{name}"


@dataclass(frozen=True)
class FlawStrategy:
    name: str
    criteria: tuple

    def __str__(self) -> str:
        return unparse(self)


PRESETS = {
    "UCPOP": "{n,s}LIFO / {o}LIFO",
    "DSep": "{n}LIFO / {o}LIFO / {s}LIFO",
    "DUnf": "{n,s}<=0 LIFO / {n,s}<=1 LIFO / {o}LIFO / {n,s}LIFO",
    "LCFR": "{n,s,o}LR",
    "LCFR-DSep": "{n,o}LR / {s}LR",
    "ZLIFO": "{n}LIFO / {o}<=0 LIFO / {o}<=1 New / {o}LIFO / {s}LIFO",
    "Static-First": "{t}LIFO / {n,s}LIFO / {o}LIFO",
    "LCFR-Loc": "{n,s,l}LR",
    "MC": "{n,s}LR / {o}MC_add",
    "MC-Loc": "{n,s}LR / {l}MC_add",
    "MW": "{n,s}LR / {o}MW_add",
    "MW-Loc": "{n,s}LR / {l}MW_add",
    "LCFR-Conf": "{n,s,u}LR / {o}LR",
    "LCFR-Loc-Conf": "{n,s,u}LR / {l}LR",
    "MW-Loc-Conf": "{n,s}LR / {u}MW_add / {l}MW_add",
}
_PRESET_KEYS = {k.lower(): k for k in PRESETS}

_CRITERION = re.compile(
    r"""^\{(?P<types>[^}]*)\}\s*
        (?:_?\{?\s*(?:≤|<=|\\leq)\s*(?P<bound>\d+)\s*\}?)?\s*
        (?P<order>[A-Za-z]+)\s*
        (?:_\s*\{?\s*(?P<sub>[A-Za-z]+)\s*\}?)?$""",
    re.VERBOSE,
)


def parse_criterion(text: str) -> SelectionCriterion:
    m = _CRITERION.match(text.strip())
    if not m:
        raise StrategyError(f"malformed selection criterion {text.strip()!r}")
    types = [t.strip() for t in m.group("types").split(",") if t.strip()]
    if not types:
        raise StrategyError(f"empty flaw-type set in {text.strip()!r}")
    for t in types:
        if t not in FLAW_TYPES:
            raise StrategyError(f"unknown flaw type {t!r}")
    order = m.group("order")
    canon = {o.lower(): o for o in ORDERINGS}.get(order.lower())
    if canon is None:
        raise StrategyError(f"unknown ordering criterion {order!r}")
    sub = m.group("sub")
    if sub is not None and (canon not in HEURISTIC_ORDERINGS or sub.lower() != "add"):
        raise StrategyError(f"unsupported heuristic subscript {sub!r} on {canon}")
    tset = frozenset(types)
    if canon in OC_ONLY_ORDERINGS and tset & THREAT_TYPES:
        raise StrategyError(f"ordering {canon} applies only to open conditions")
    bound = m.group("bound")
    return SelectionCriterion(tset, canon, None if bound is None else int(bound))


def check_complete(criteria, lifted: bool = False) -> None:
    """Every flaw that can arise must match some unbounded criterion."""
    unbounded = set().union(*(c.types for c in criteria if c.bound is None)) if criteria else set()
    if "n" not in unbounded:
        raise StrategyError("incomplete strategy: threats (n) are never selected")
    if lifted and "s" not in unbounded:
        raise StrategyError("incomplete strategy: separable threats (s) are never selected")
    if not unbounded & {"o", "l"}:
        raise StrategyError("incomplete strategy: open conditions (o or l) are never selected")


def parse_strategy(text: str, lifted: bool = False, name: str | None = None) -> FlawStrategy:
    """Parse a preset name or slash-separated criteria."""
    key = _PRESET_KEYS.get(text.strip().lower())
    if key is not None:
        name, text = key, PRESETS[key]
    criteria = tuple(parse_criterion(part) for part in text.split("/"))
    check_complete(criteria, lifted)
    return FlawStrategy(name or unparse_criteria(criteria), criteria)


def unparse_criteria(criteria) -> str:
    return " / ".join(str(c) for c in criteria)


def unparse(strategy: FlawStrategy) -> str:
    return unparse_criteria(strategy.criteria)


# ---------------------------------------------------------------------------
# classification


def classify_flaw(plan: Plan, flaw) -> frozenset:
    if isinstance(flaw, Unsafe):
        return frozenset("ns") if separable(plan, flaw) else frozenset("n")
    types = {"o"}
    if is_static(plan, flaw):
        types.add("t")
    if _is_local(plan, flaw):
        types.add("l")
    if is_unsafe_condition(plan, flaw):
        types.add("u")
    return frozenset(types)


def _is_local(plan: Plan, oc: OpenCondition) -> bool:
    local = plan.memo.get("local")
    if local is None:
        local = plan.memo["local"] = (plan.local_step(),)
    return oc.step == local[0]


def _has_type(plan: Plan, flaw, t: str) -> bool:
    if isinstance(flaw, Unsafe):
        if t == "n":
            return True
        return t == "s" and separable(plan, flaw)
    if t == "o":
        return True
    if t == "t":
        return is_static(plan, flaw)
    if t == "l":
        return _is_local(plan, flaw)
    if t == "u":
        return is_unsafe_condition(plan, flaw)
    return False


def matches(plan: Plan, flaw, crit: SelectionCriterion) -> bool:
    """Cheap tests first so that expensive ones are only run when needed."""
    is_threat = isinstance(flaw, Unsafe)
    if is_threat and not crit.types & THREAT_TYPES:
        return False
    if not is_threat and not crit.types & OC_TYPES:
        return False
    if not any(_has_type(plan, flaw, t) for t in sorted(crit.types, key="onstlu".index)):
        return False
    return crit.bound is None or count_refinements(plan, flaw) <= crit.bound


# ---------------------------------------------------------------------------
# ordering


def _draw(seed: int, plan: Plan, flaw) -> float:
    return random.Random(f"{seed}:{plan.serial}:{flaw.index}").random()


def sort_key(plan: Plan, flaw, ordering: str, table, seed: int = 0):
    """Smaller keys are preferred; ties are broken by LIFO by the caller."""
    if ordering in ("LIFO", "FIFO"):
        return 0
    if ordering == "R":
        return _draw(seed, plan, flaw)
    if ordering == "LR":
        return count_refinements(plan, flaw)
    if ordering == "New":
        return 0 if resolvable_by_new_action(plan, flaw) else 1
    ce = formula_cost(flaw.condition, table, plan.bindings)
    if ordering == "MC":
        return -ce.cost
    if ordering == "LC":
        return ce.cost
    if ordering == "MW":
        return -ce.effort
    return ce.effort


def _position(flaw, ordering: str) -> int:
    return flaw.index if ordering == "FIFO" else -flaw.index


def select_flaw(plan: Plan, strategy: FlawStrategy, table=None, seed: int = 0, short_circuit: bool = True):
    """The flaw matching the earliest criterion, best under its ordering."""
    if not short_circuit:
        return select_flaw_exhaustive(plan, strategy, table, seed)
    flaws = sorted(plan.unsafes + plan.open_conds, key=lambda f: -f.index)
    for crit in strategy.criteria:
        ordering = crit.ordering
        if ordering == "FIFO":
            flaws_iter = reversed(flaws)
        else:
            flaws_iter = flaws
        best = best_key = None
        for flaw in flaws_iter:
            if not matches(plan, flaw, crit):
                continue
            if ordering in ("LIFO", "FIFO"):
                return flaw
            key = sort_key(plan, flaw, ordering, table, seed)
            if best is None or key < best_key:
                best, best_key = flaw, key
                if ordering == "LR" and key == 0:
                    break
                if ordering == "New" and key == 0:
                    break
        if best is not None:
            return best
    raise ValueError("no flaw matches the strategy")


def select_flaw_exhaustive(plan: Plan, strategy: FlawStrategy, table=None, seed: int = 0):
    """Reference implementation: classify every flaw against every criterion."""
    flaws = list(plan.unsafes + plan.open_conds)
    for crit in strategy.criteria:
        matching = []
        for flaw in flaws:
            types = classify_flaw(plan, flaw)
            if not types & crit.types:
                continue
            if crit.bound is not None and count_refinements(plan, flaw) > crit.bound:
                continue
            matching.append(flaw)
        if matching:
            return min(
                matching,
                key=lambda f: (sort_key(plan, f, crit.ordering, table, seed), _position(f, crit.ordering)),
            )
    raise ValueError("no flaw matches the strategy")
