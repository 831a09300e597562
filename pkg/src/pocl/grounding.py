"""Instantiate action schemas over problem objects."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Mapping

from .formulas import (
    EQUALITY,
    FALSE,
    ActionSchema,
    And,
    Domain,
    Effect,
    Exists,
    Forall,
    Literal,
    Not,
    Or,
    Problem,
    TRUE,
    conjuncts,
    simplify,
    substitute,
)
from .pddl import objects_by_type


@dataclass(frozen=True, eq=False)
class GroundAction:
    """A schema instance.  Arguments are constants in ground mode; in lifted
    mode they may be step-local variables."""

    name: str
    args: tuple
    precondition: object
    effects: tuple
    duration: tuple = ()
    durative: bool = False
    id: int = 0

    def __str__(self) -> str:
        return "(" + " ".join((self.name, *self.args)) + ")"

    @property
    def signature(self) -> tuple:
        return (self.name, self.args)


def objects_of(table: Mapping[str, tuple], type_spec) -> tuple:
    if isinstance(type_spec, tuple):
        seen: dict[str, None] = {}
        for t in type_spec:
            for o in table.get(t, ()):
                seen[o] = None
        return tuple(sorted(seen))
    return table.get(type_spec, ())


def expand_universals(f, table: Mapping[str, tuple]):
    """Replace every universal quantifier by the conjunction of its instances."""
    if isinstance(f, Literal):
        return f
    if isinstance(f, And):
        return And(tuple(expand_universals(p, table) for p in f.parts))
    if isinstance(f, Or):
        return Or(tuple(expand_universals(p, table) for p in f.parts))
    if isinstance(f, Not):
        return Not(expand_universals(f.body, table))
    if isinstance(f, Exists):
        return Exists(f.params, expand_universals(f.body, table))
    names = [v for v, _ in f.params]
    domains = [objects_of(table, t) for _, t in f.params]
    parts = []
    for combo in itertools.product(*domains):
        parts.append(expand_universals(substitute(f.body, dict(zip(names, combo))), table))
    return And(tuple(parts))


def expand_effects(effects, table: Mapping[str, tuple], sub: Mapping[str, str]) -> list[Effect]:
    out: list[Effect] = []
    for eff in effects:
        if eff.params:
            names = [v for v, _ in eff.params]
            domains = [objects_of(table, t) for _, t in eff.params]
            combos = [dict(zip(names, c)) for c in itertools.product(*domains)]
        else:
            combos = [{}]
        for combo in combos:
            full = {**sub, **combo}
            cond = simplify(expand_universals(substitute(eff.condition, full), table))
            if cond == FALSE:
                continue
            out.append(Effect(substitute(eff.literal, full), cond))
    return out


def drop_cancelled_deletes(effects: list[Effect]) -> list[Effect]:
    """Remove deletes that an unconditional add of the same atom at the same
    time point overrides (deletes are applied before adds)."""
    added = {(e.literal.atom, e.time) for e in effects if e.literal.positive and e.condition == TRUE}
    return [e for e in effects if e.literal.positive or (e.literal.atom, e.time) not in added]


def detect_static_predicates(domain: Domain) -> frozenset:
    """Predicates that appear in no effect of any schema (equality included)."""
    affected = {e.literal.predicate for a in domain.actions for e in a.effects}
    return frozenset(p for p in domain.predicates if p not in affected) | {EQUALITY}


def _static_conjuncts(schema: ActionSchema, static: frozenset) -> list[Literal]:
    return [
        c
        for c in conjuncts(schema.precondition)
        if isinstance(c, Literal) and c.predicate in static
    ]


def _static_holds(lit: Literal, init: frozenset) -> bool:
    if lit.predicate == EQUALITY:
        return (lit.terms[0] == lit.terms[1]) == lit.positive
    return (lit.atom in init) == lit.positive


@dataclass
class GroundProblem:
    """Everything the search needs from preprocessing, shared read-only."""

    domain: Domain
    problem: Problem
    actions: list
    static: frozenset
    objects: Mapping[str, tuple]
    init: frozenset
    goal: object
    pruned: int = 0
    durative: bool = False
    stats: dict = field(default_factory=dict)


def ground_problem(domain: Domain, problem: Problem) -> GroundProblem:
    table = objects_by_type(domain, dict(problem.objects))
    static = detect_static_predicates(domain)
    actions: list[GroundAction] = []
    pruned = 0
    for schema in domain.actions:
        insts, n_pruned = _ground_schema(schema, table, static, problem.init)
        pruned += n_pruned
        for args, sub in insts:
            pre = simplify(expand_universals(substitute(schema.precondition, sub), table))
            if pre == FALSE:
                pruned += 1
                continue
            effects = drop_cancelled_deletes(expand_effects(schema.effects, table, sub))
            actions.append(
                GroundAction(
                    schema.name,
                    args,
                    pre,
                    tuple(effects),
                    schema.duration,
                    schema.durative,
                    len(actions) + 1,
                )
            )
    goal = simplify(expand_universals(problem.goal, table))
    return GroundProblem(
        domain=domain,
        problem=problem,
        actions=actions,
        static=static,
        objects=table,
        init=problem.init,
        goal=goal,
        pruned=pruned,
        durative=domain.durative,
    )


def ground_actions(domain: Domain, problem: Problem) -> list[GroundAction]:
    return ground_problem(domain, problem).actions


def _ground_schema(schema: ActionSchema, table, static, init) -> tuple[list, int]:
    """Backtracking enumeration of parameter tuples, pruning as soon as a
    top-level static literal becomes ground and false."""
    names = [v for v, _ in schema.parameters]
    domains = [objects_of(table, t) for _, t in schema.parameters]
    checks = _static_conjuncts(schema, static)
    # attach each static check to the parameter position completing it
    position = {v: k for k, v in enumerate(names)}
    by_depth: dict[int, list[Literal]] = {}
    for lit in checks:
        depth = max((position[t] for t in lit.terms if t in position), default=-1)
        by_depth.setdefault(depth, []).append(lit)

    total = 1
    for d in domains:
        total *= len(d)
    results: list[tuple] = []

    def ok(depth: int, sub: dict) -> bool:
        for lit in by_depth.get(depth, ()):
            if not _static_holds(substitute(lit, sub), init):
                return False
        return True

    if not ok(-1, {}):
        return [], total

    def rec(k: int, sub: dict, args: list) -> None:
        if k == len(names):
            results.append((tuple(args), dict(sub)))
            return
        for obj in domains[k]:
            sub[names[k]] = obj
            args.append(obj)
            if ok(k, sub):
                rec(k + 1, sub, args)
            args.pop()
            del sub[names[k]]

    rec(0, {}, [])
    return results, total - len(results)
