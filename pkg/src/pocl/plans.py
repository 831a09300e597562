"""Partial plans, threat detection and flaw refinements."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable

from .bindings import EMPTY, BindingSet, separation_refinements
from .formulas import (
    EQUALITY,
    FALSE,
    TRUE,
    Effect,
    Exists,
    Forall,
    Literal,
    Or,
    conjuncts,
    is_variable,
    simplify,
    substitute,
    substitute_effect,
)
from .grounding import GroundAction, GroundProblem, expand_effects, expand_universals, objects_of
from .heuristics import INF, HeuristicTable
from .ordering import GOAL_ID, INIT_ID, BitOrdering
from .stn import DGraph


@dataclass(frozen=True)
class Step:
    id: int
    action: GroundAction


@dataclass(frozen=True)
class Link:
    producer: int
    effect_time: str
    condition: Literal
    consumer: int
    time: str

    @property
    def producer_ref(self) -> tuple:
        return (self.producer, self.effect_time)

    @property
    def condition_ref(self) -> tuple:
        return (self.consumer, "e" if self.time == "e" else "s")

    @property
    def window_end(self) -> tuple:
        """Last reference the condition must survive until."""
        return (self.consumer, "s" if self.time == "s" else "e")


@dataclass(frozen=True)
class OpenCondition:
    step: int
    condition: object
    index: int

    @property
    def time(self) -> str:
        return self.condition.time if isinstance(self.condition, Literal) else "s"

    @property
    def is_literal(self) -> bool:
        return isinstance(self.condition, Literal)

    def __str__(self) -> str:
        return f"{_condition_text(self.condition)}@{self.time} -> {_step_name(self.step)}"


@dataclass(frozen=True)
class Unsafe:
    link: Link
    step: int
    effect: Effect
    index: int

    def __str__(self) -> str:
        return f"{_step_name(self.step)} threatens {self.link.condition} ({self.link.producer}->{_step_name(self.link.consumer)})"


def _step_name(i: int) -> str:
    return "goal" if i == GOAL_ID else str(i)


def _condition_text(f) -> str:
    from .pddl import formula_text

    return formula_text(f)


@dataclass(frozen=True)
class Candidate:
    """One way to resolve a flaw, already checked for consistency."""

    kind: str  # "link", "replace", "order", "bind"
    orderings: object = None
    bindings: BindingSet = EMPTY
    producer: int = 0
    effect: Effect | None = None
    action: GroundAction | None = None
    formulas: tuple = ()

    @property
    def adds_action(self) -> bool:
        return self.action is not None


class PlanningContext:
    """Read-only preprocessing artifacts shared by every plan of a search."""

    def __init__(self, gp: GroundProblem, table: HeuristicTable, *, lifted: bool = False, epsilon=1):
        self.gp = gp
        self.table = table
        self.lifted = lifted
        self.durative = gp.durative
        self.epsilon = epsilon
        self.init = gp.init
        self.static = gp.static
        self.objects = gp.objects
        self.goal = gp.goal
        self.init_by_pred: dict[str, list] = {}
        for pred, terms in sorted(gp.init):
            self.init_by_pred.setdefault(pred, []).append(terms)
        self.achievers: dict[tuple, list] = {}
        if not lifted:
            for a in gp.actions:
                if table.action(a, "e").cost == INF:
                    continue
                for eff in a.effects:
                    if table.formula(eff.condition).cost == INF:
                        continue
                    self.achievers.setdefault(eff.literal.key, []).append((a, eff))
        self.schemas: list[tuple] = []
        if lifted:
            domain = gp.domain
            for schema in domain.actions:
                pre = simplify(expand_universals(schema.precondition, gp.objects))
                if pre == FALSE:
                    continue
                effects = tuple(expand_effects(schema.effects, gp.objects, {}))
                self.schemas.append((schema, pre, effects))

    def index_key(self, lit: Literal, positive: bool) -> tuple:
        """Key under which producers of ``lit`` (with the given sign) are filed."""
        if self.lifted:
            return (lit.predicate, positive)
        return (lit.predicate, lit.terms, positive)

    def initial_orderings(self):
        return DGraph(epsilon=self.epsilon) if self.durative else BitOrdering()

    def instantiate(self, schema_entry, step_id: int) -> tuple[GroundAction, list]:
        schema, pre, effects = schema_entry
        sub = {v: f"{v}#{step_id}" for v, _ in schema.parameters}
        domains = [(sub[v], objects_of(self.objects, t)) for v, t in schema.parameters]
        action = GroundAction(
            schema.name,
            tuple(sub[v] for v, _ in schema.parameters),
            substitute(pre, sub),
            tuple(substitute_effect(e, sub) for e in effects),
            schema.duration,
            schema.durative,
            -step_id,
        )
        return action, domains


class Plan:
    """Immutable snapshot of a partial plan.

    Step ``k`` (1-based) is ``steps[k-1]``; step 0 and :data:`GOAL_ID` are the
    dummy initial and goal actions.  ``memo`` caches per-flaw refinement
    candidates; it never changes observable state.
    """

    __slots__ = (
        "ctx",
        "steps",
        "links",
        "orderings",
        "bindings",
        "open_conds",
        "unsafes",
        "producers",
        "next_index",
        "parent",
        "serial",
        "rank",
        "memo",
        "depth",
    )

    def __init__(self, ctx, steps, links, orderings, bindings, open_conds, unsafes, producers, next_index, parent=None):
        self.ctx = ctx
        self.steps = steps
        self.links = links
        self.orderings = orderings
        self.bindings = bindings
        self.open_conds = open_conds
        self.unsafes = unsafes
        self.producers = producers
        self.next_index = next_index
        self.parent = parent
        self.serial = 0
        self.rank = None
        self.memo: dict = {}
        self.depth = 0 if parent is None else parent.depth + 1

    @property
    def num_steps(self) -> int:
        return len(self.steps)

    @property
    def flaws(self) -> list:
        return list(self.unsafes) + list(self.open_conds)

    def is_complete(self) -> bool:
        return not self.open_conds and not self.unsafes

    def action(self, step_id: int) -> GroundAction:
        return self.steps[step_id - 1].action

    def effects_of(self, step_id: int) -> tuple:
        return self.steps[step_id - 1].action.effects

    def instantaneous(self, step_id: int) -> bool:
        return step_id > 0 and not self.steps[step_id - 1].action.durative

    def local_step(self) -> int | None:
        """The most recently added step that still has open conditions."""
        best = None
        for oc in self.open_conds:
            key = oc.step if oc.step != GOAL_ID else 0
            if best is None or key > (best if best != GOAL_ID else 0):
                best = oc.step
        return best

    def __repr__(self) -> str:
        return f"<Plan steps={self.num_steps} oc={len(self.open_conds)} ul={len(self.unsafes)}>"


def decompose(f) -> list:
    f = simplify(f)
    if f == TRUE:
        return []
    return conjuncts(f)


def open_conditions(step: int, formulas, index: int) -> list[OpenCondition]:
    """Number conditions added together so that the first listed one is the
    most recent, i.e. the one LIFO selection picks first."""
    n = len(formulas)
    return [OpenCondition(step, f, index + n - 1 - k) for k, f in enumerate(formulas)]


def make_initial_plan(ctx: PlanningContext) -> Plan:
    ocs = tuple(open_conditions(GOAL_ID, decompose(ctx.goal), 0))
    return Plan(ctx, (), (), ctx.initial_orderings(), EMPTY, ocs, (), {}, len(ocs))


# ---------------------------------------------------------------------------
# unification helpers


def _same_terms(a: tuple, b: tuple, bindings: BindingSet) -> BindingSet | None:
    if a == b:
        return bindings
    if bindings.is_empty() and not any(is_variable(t) for t in a) and not any(is_variable(t) for t in b):
        return None
    return bindings.unify_terms(zip(a, b))


def _could_match(a: tuple, b: tuple, bindings: BindingSet) -> bool:
    if a == b:
        return True
    if bindings.is_empty() and not any(is_variable(t) for t in a) and not any(is_variable(t) for t in b):
        return False
    return bindings.unify_terms(zip(a, b)) is not None


# ---------------------------------------------------------------------------
# threats


def _threatens(plan_like, orderings, bindings, link: Link, k: int, effect: Effect) -> bool:
    lit, q = effect.literal, link.condition
    if lit.positive == q.positive or lit.predicate != q.predicate:
        return False
    if not _could_match(lit.terms, q.terms, bindings):
        return False
    ctx = plan_like.ctx
    te = (k, effect.time)
    if not ctx.durative:
        if k == link.producer or k == link.consumer:
            return False
    else:
        if te == link.producer_ref:
            return False
        if k == link.consumer and (te == link.window_end or te == link.condition_ref or plan_like.instantaneous(k)):
            return False
        if k == link.producer and plan_like.instantaneous(k):
            return False
    if orderings.entails_before(te, link.producer_ref):
        return False
    if orderings.entails_before(link.window_end, te):
        return False
    return True


class _View:
    """Lightweight stand-in exposing what threat checks need from a plan."""

    __slots__ = ("ctx", "steps")

    def __init__(self, ctx, steps):
        self.ctx = ctx
        self.steps = steps

    def instantaneous(self, step_id: int) -> bool:
        return step_id > 0 and not self.steps[step_id - 1].action.durative


def _threats_to_link(view, producers, orderings, bindings, link: Link) -> list[tuple]:
    q = link.condition
    out = []
    for k, eff in producers.get(view.ctx.index_key(q, not q.positive), ()):
        if _threatens(view, orderings, bindings, link, k, eff):
            out.append((link, k, eff))
    return out


def _threats_from_step(view, links, orderings, bindings, k: int, effects) -> list[tuple]:
    out = []
    for link in links:
        for eff in effects:
            if _threatens(view, orderings, bindings, link, k, eff):
                out.append((link, k, eff))
    return out


def all_threats(plan: Plan) -> set[tuple]:
    """Full recomputation of (link, step, effect) threats."""
    view = _View(plan.ctx, plan.steps)
    out = set()
    for link in plan.links:
        for step in plan.steps:
            for eff in step.action.effects:
                if _threatens(view, plan.orderings, plan.bindings, link, step.id, eff):
                    out.add((link, step.id, eff))
    return out


def detect_new_threats(plan: Plan, delta) -> list[tuple]:
    """Threats involving ``delta``: a :class:`Link` or a step id."""
    view = _View(plan.ctx, plan.steps)
    if isinstance(delta, Link):
        return _threats_to_link(view, plan.producers, plan.orderings, plan.bindings, delta)
    return _threats_from_step(view, plan.links, plan.orderings, plan.bindings, delta, plan.effects_of(delta))


def still_threat(plan: Plan, u: Unsafe) -> bool:
    return _threatens(plan, plan.orderings, plan.bindings, u.link, u.step, u.effect)


# ---------------------------------------------------------------------------
# reuse (for the reuse-aware additive heuristic)


def can_reuse(plan: Plan, oc: OpenCondition) -> bool:
    """Some existing step has an effect matching the condition and is not
    forced after the consumer."""
    q = oc.condition
    if not isinstance(q, Literal):
        return False
    cond_ref = (oc.step, "e" if q.time == "e" else "s")
    o = plan.orderings
    for k, eff in plan.producers.get(plan.ctx.index_key(q, q.positive), ()):
        if not _could_match(eff.literal.terms, q.terms, plan.bindings):
            continue
        if o.possibly_before((k, eff.time), cond_ref):
            return True
    return False


# ---------------------------------------------------------------------------
# candidates


def candidates(plan: Plan, flaw) -> list[Candidate]:
    key = ("cand", flaw.index)
    hit = plan.memo.get(key)
    if hit is None:
        hit = _threat_candidates(plan, flaw) if isinstance(flaw, Unsafe) else _oc_candidates(plan, flaw)
        plan.memo[key] = hit
    return hit


def count_refinements(plan: Plan, flaw) -> int:
    return len(candidates(plan, flaw))


def _threat_candidates(plan: Plan, u: Unsafe) -> list[Candidate]:
    o = plan.orderings
    te = (u.step, u.effect.time)
    out = []
    demoted = o.add_before(te, u.link.producer_ref)
    if demoted is not None:
        out.append(Candidate("order", orderings=demoted, bindings=plan.bindings))
    promoted = o.add_before(u.link.window_end, te)
    if promoted is not None:
        out.append(Candidate("order", orderings=promoted, bindings=plan.bindings))
    if plan.ctx.lifted:
        for b in separation_refinements(u.effect.literal, u.link.condition, plan.bindings):
            out.append(Candidate("bind", orderings=o, bindings=b))
    return out


def separable(plan: Plan, u: Unsafe) -> bool:
    if not plan.ctx.lifted:
        return False
    return any(c.kind == "bind" for c in candidates(plan, u))


def _oc_candidates(plan: Plan, oc: OpenCondition) -> list[Candidate]:
    q = oc.condition
    ctx = plan.ctx
    b = plan.bindings
    if isinstance(q, Or):
        out = []
        for part in q.parts:
            part = simplify(part)
            if part != FALSE:
                out.append(Candidate("replace", orderings=plan.orderings, bindings=b, formulas=tuple(decompose(part))))
        return out
    if isinstance(q, Exists):
        return _exists_candidates(plan, oc)
    if isinstance(q, Forall):
        body = simplify(expand_universals(q, ctx.objects))
        return [Candidate("replace", orderings=plan.orderings, bindings=b, formulas=tuple(decompose(body)))]
    if q.predicate == EQUALITY:
        x, y = q.terms
        nb = b.unify_terms([(x, y)]) if q.positive else b.add_neq(x, y)
        return [] if nb is None else [Candidate("replace", orderings=plan.orderings, bindings=nb)]

    out: list[Candidate] = []
    cond_ref = (oc.step, "e" if q.time == "e" else "s")
    o = plan.orderings
    # the initial dummy action
    out.extend(_initial_candidates(plan, q, cond_ref))
    # existing steps
    for k, eff in plan.producers.get(plan.ctx.index_key(q, q.positive), ()):
        if not ctx.durative and k == oc.step:
            continue
        nb = _same_terms(eff.literal.terms, q.terms, b)
        if nb is None:
            continue
        no = o.add_before((k, eff.time), cond_ref)
        if no is None:
            continue
        out.append(Candidate("link", orderings=no, bindings=nb, producer=k, effect=eff))
    # new steps
    new_id = plan.num_steps + 1
    if not ctx.lifted:
        achievers = ctx.achievers.get(q.key, ()) if q.is_ground() else ()
        for action, eff in achievers:
            no = o.add_step(action.duration, not action.durative)
            no = no and no.add_before((new_id, eff.time), cond_ref)
            if no is None:
                continue
            out.append(Candidate("link", orderings=no, bindings=b, producer=new_id, effect=eff, action=action))
    else:
        for entry in ctx.schemas:
            relevant = [e for e in entry[2] if e.literal.predicate == q.predicate and e.literal.positive == q.positive]
            if not relevant:
                continue
            action, domains = ctx.instantiate(entry, new_id)
            declared = b.declare(domains)
            if declared is None:
                continue
            base = o.add_step(action.duration, not action.durative)
            if base is None:
                continue
            seen = set()
            for eff in action.effects:
                if eff.literal.predicate != q.predicate or eff.literal.positive != q.positive:
                    continue
                nb = _same_terms(eff.literal.terms, q.terms, declared)
                if nb is None:
                    continue
                sig = (eff.literal.terms, eff.time)
                if sig in seen:
                    continue
                seen.add(sig)
                no = base.add_before((new_id, eff.time), cond_ref)
                if no is None:
                    continue
                out.append(Candidate("link", orderings=no, bindings=nb, producer=new_id, effect=eff, action=action))
    return out


def _initial_candidates(plan: Plan, q: Literal, cond_ref) -> list[Candidate]:
    ctx = plan.ctx
    b = plan.bindings
    o = plan.orderings
    if o.add_before((INIT_ID, "e"), cond_ref) is None:
        return []
    if q.positive:
        out = []
        if b.is_empty() and q.is_ground():
            if q.atom in ctx.init:
                out.append(Candidate("link", orderings=o, bindings=b, producer=INIT_ID, effect=Effect(q)))
            return out
        for terms in ctx.init_by_pred.get(q.predicate, ()):
            nb = _same_terms(terms, q.terms, b)
            if nb is not None:
                out.append(
                    Candidate("link", orderings=o, bindings=nb, producer=INIT_ID, effect=Effect(Literal(q.predicate, terms, True, "e")))
                )
        return out
    # closed world: the atom must differ from every initial atom
    if b.is_empty() and q.is_ground():
        if q.atom in ctx.init:
            return []
        return [Candidate("link", orderings=o, bindings=b, producer=INIT_ID, effect=Effect(q))]
    conflicts = [t for t in ctx.init_by_pred.get(q.predicate, ()) if _could_match(t, q.terms, b)]
    results: list[BindingSet] = [b]
    for terms in conflicts:
        nxt: list[BindingSet] = []
        for cur in results:
            if not _could_match(terms, q.terms, cur):
                nxt.append(cur)
                continue
            nxt.extend(separation_refinements(Literal(q.predicate, terms), q, cur))
        results = _dedupe(nxt)
        if not results:
            return []
    return [
        Candidate("link", orderings=o, bindings=nb, producer=INIT_ID, effect=Effect(q))
        for nb in results
    ]


def _dedupe(sets: list[BindingSet]) -> list[BindingSet]:
    out, seen = [], set()
    for s in sets:
        key = s.canonical()
        if key not in seen:
            seen.add(key)
            out.append(s)
    return out


def _exists_candidates(plan: Plan, oc: OpenCondition) -> list[Candidate]:
    q = oc.condition
    ctx = plan.ctx
    names = [v for v, _ in q.params]
    if ctx.lifted:
        sub = {v: f"{v}#x{oc.index}" for v in names}
        declared = plan.bindings.declare((sub[v], objects_of(ctx.objects, t)) for v, t in q.params)
        if declared is None:
            return []
        body = simplify(substitute(q.body, sub))
        if body == FALSE:
            return []
        return [Candidate("replace", orderings=plan.orderings, bindings=declared, formulas=tuple(decompose(body)))]
    out = []
    domains = [objects_of(ctx.objects, t) for _, t in q.params]
    for combo in itertools.product(*domains):
        body = simplify(substitute(q.body, dict(zip(names, combo))))
        if body == FALSE:
            continue
        out.append(Candidate("replace", orderings=plan.orderings, bindings=plan.bindings, formulas=tuple(decompose(body))))
    return out


# ---------------------------------------------------------------------------
# successors


def refinements(plan: Plan, flaw) -> list[Plan]:
    """All consistent successors resolving ``flaw`` (empty: dead end)."""
    return [apply_candidate(plan, flaw, c) for c in candidates(plan, flaw)]


def _recheck(plan_like, unsafes: Iterable[Unsafe], orderings, bindings, skip=None) -> list[Unsafe]:
    return [
        u
        for u in unsafes
        if u is not skip and _threatens(plan_like, orderings, bindings, u.link, u.step, u.effect)
    ]


def apply_candidate(plan: Plan, flaw, cand: Candidate) -> Plan:
    ctx = plan.ctx
    index = plan.next_index
    if isinstance(flaw, Unsafe):
        unsafes = _recheck(plan, plan.unsafes, cand.orderings, cand.bindings, skip=flaw)
        return Plan(ctx, plan.steps, plan.links, cand.orderings, cand.bindings, plan.open_conds, tuple(unsafes), plan.producers, index, plan)

    ocs = [o for o in plan.open_conds if o is not flaw]
    if cand.kind == "replace":
        ocs += open_conditions(flaw.step, cand.formulas, index)
        index += len(cand.formulas)
        unsafes = plan.unsafes
        if cand.bindings is not plan.bindings:
            unsafes = tuple(_recheck(plan, plan.unsafes, cand.orderings, cand.bindings))
        return Plan(ctx, plan.steps, plan.links, cand.orderings, cand.bindings, tuple(ocs), unsafes, plan.producers, index, plan)

    steps = plan.steps
    producers = plan.producers
    k = cand.producer
    if cand.action is not None:
        steps = steps + (Step(k, cand.action),)
        producers = dict(producers)
        for eff in cand.action.effects:
            key = ctx.index_key(eff.literal, eff.literal.positive)
            producers[key] = producers.get(key, ()) + ((k, eff),)
        pre = decompose(cand.action.precondition)
        ocs += open_conditions(k, pre, index)
        index += len(pre)
    if cand.effect.condition != TRUE:
        cond = decompose(cand.effect.condition)
        ocs += open_conditions(k, cond, index)
        index += len(cond)
    q = flaw.condition
    link = Link(k, cand.effect.time if k != INIT_ID else "e", q, flaw.step, q.time)
    view = _View(ctx, steps)
    unsafes = _recheck(view, plan.unsafes, cand.orderings, cand.bindings)
    fresh = _threats_to_link(view, producers, cand.orderings, cand.bindings, link)
    if cand.action is not None:
        fresh += _threats_from_step(view, plan.links, cand.orderings, cand.bindings, k, cand.action.effects)
    for lk, step, eff in fresh:
        unsafes.append(Unsafe(lk, step, eff, index))
        index += 1
    return Plan(ctx, steps, plan.links + (link,), cand.orderings, cand.bindings, tuple(ocs), tuple(unsafes), producers, index, plan)


# ---------------------------------------------------------------------------
# flaw properties used by selection strategies


def is_static(plan: Plan, oc: OpenCondition) -> bool:
    return isinstance(oc.condition, Literal) and oc.condition.predicate in plan.ctx.static


def is_unsafe_condition(plan: Plan, oc: OpenCondition) -> bool:
    """Would some candidate link for this condition be threatened by an
    effect of a step already in the plan?"""
    key = ("unsafe", oc.index)
    hit = plan.memo.get(key)
    if hit is not None:
        return hit
    result = False
    q = oc.condition
    if isinstance(q, Literal) and q.predicate != EQUALITY:
        threats = plan.producers.get(plan.ctx.index_key(q, not q.positive), ())
        if threats:
            for cand in candidates(plan, oc):
                if cand.kind != "link":
                    continue
                steps = plan.steps if cand.action is None else plan.steps + (Step(cand.producer, cand.action),)
                view = _View(plan.ctx, steps)
                link = Link(cand.producer, cand.effect.time if cand.producer != INIT_ID else "e", q, oc.step, q.time)
                if any(_threatens(view, cand.orderings, cand.bindings, link, k, eff) for k, eff in threats):
                    result = True
                    break
    plan.memo[key] = result
    return result


def resolvable_by_new_action(plan: Plan, oc: OpenCondition) -> bool:
    return any(c.adds_action for c in candidates(plan, oc))


# ---------------------------------------------------------------------------
# finished plans


def ground_steps(plan: Plan) -> list[tuple[int, str, tuple]]:
    """(step id, action name, constant arguments) for every step."""
    b = plan.bindings
    variables = [t for s in plan.steps for t in s.action.args if is_variable(t)]
    assignment: dict = {}
    if variables:
        assignment = next(b.assignments(variables), None)
        if assignment is None:
            raise ValueError("bindings admit no ground instantiation")
    out = []
    for s in plan.steps:
        args = tuple(assignment.get(t, b.find(t)) if is_variable(t) else t for t in s.action.args)
        out.append((s.id, s.action.name, args))
    return out


def schedule(plan: Plan) -> list[tuple[int, str, tuple, object, object]]:
    """Steps with start time and duration.

    Durative plans use the earliest-start solution of the temporal network;
    classical plans are listed in topological order with their position as
    start and no duration.
    """
    steps = {sid: (name, args) for sid, name, args in ground_steps(plan)}
    if isinstance(plan.orderings, DGraph):
        rows = plan.orderings.schedule(sorted(steps))
        rows.sort(key=lambda r: (r[1], r[0]))
        return [(sid, *steps[sid], start, dur) for sid, start, dur in rows]
    order = plan.orderings.topological_order()
    return [(sid, *steps[sid], pos, None) for pos, sid in enumerate(order)]
