"""Independent plan validator.

Works directly from the parsed domain and problem by simulating states; it
does not use grounding, the heuristic, or any plan-space machinery.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from fractions import Fraction

from .formulas import EQUALITY, And, Domain, Exists, Forall, Literal, Not, Or, Problem, atom_text, substitute
from .pddl import objects_by_type, type_closure, is_subtype

_LINE = re.compile(r"^\s*(?P<t>[-+0-9./]+)\s*:\s*\((?P<body>[^()]*)\)\s*(?:\[\s*(?P<d>[-+0-9./]+)\s*\])?\s*$")


@dataclass(frozen=True)
class PlanStep:
    time: Fraction
    name: str
    args: tuple
    duration: Fraction | None = None


@dataclass
class Verdict:
    ok: bool
    message: str = "plan valid"

    def __bool__(self) -> bool:
        return self.ok


def parse_plan(text: str) -> list[PlanStep]:
    steps = []
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.split(";", 1)[0].strip()
        if not line:
            continue
        m = _LINE.match(line)
        if not m:
            raise ValueError(f"line {n}: cannot read plan step {raw.strip()!r}")
        words = m.group("body").split()
        if not words:
            raise ValueError(f"line {n}: empty action")
        d = m.group("d")
        steps.append(
            PlanStep(Fraction(m.group("t")), words[0].lower(), tuple(w.lower() for w in words[1:]), None if d is None else Fraction(d))
        )
    return steps


class _World:
    def __init__(self, domain: Domain, problem: Problem):
        self.domain = domain
        self.problem = problem
        self.types = objects_by_type(domain, problem.objects)
        self.closure = type_closure(domain)

    def objects(self, type_spec) -> tuple:
        specs = type_spec if isinstance(type_spec, tuple) else (type_spec,)
        out = set()
        for t in specs:
            out.update(self.types.get(t, ()))
        return tuple(sorted(out))

    def holds(self, f, state, times=None) -> bool:
        if isinstance(f, Literal):
            if times is not None and f.time not in times:
                return True
            if f.predicate == EQUALITY:
                value = f.terms[0] == f.terms[1]
            else:
                value = (f.predicate, f.terms) in state
            return value == f.positive
        if isinstance(f, And):
            return all(self.holds(p, state, times) for p in f.parts)
        if isinstance(f, Or):
            return any(self.holds(p, state, times) for p in f.parts)
        if isinstance(f, Not):
            return not self.holds(f.body, state, times)
        if isinstance(f, (Exists, Forall)):
            names = [v for v, _ in f.params]
            combos = itertools.product(*(self.objects(t) for _, t in f.params))
            results = (self.holds(substitute(f.body, dict(zip(names, c))), state, times) for c in combos)
            return any(results) if isinstance(f, Exists) else all(results)
        raise TypeError(f"unexpected formula {f!r}")

    def failing(self, f, state, times=None):
        """A literal that makes ``f`` false, for error messages."""
        if isinstance(f, Literal):
            return None if self.holds(f, state, times) else f
        if isinstance(f, And):
            for p in f.parts:
                bad = self.failing(p, state, times)
                if bad is not None:
                    return bad
            return None
        return None if self.holds(f, state, times) else f

    def instantiate(self, step: PlanStep):
        try:
            schema = self.domain.action(step.name)
        except KeyError:
            raise ValueError(f"unknown action {step.name!r}") from None
        if len(schema.parameters) != len(step.args):
            raise ValueError(f"wrong number of arguments for {step.name}")
        for (var, t), obj in zip(schema.parameters, step.args):
            if obj not in self.problem.objects:
                raise ValueError(f"unknown object {obj!r} in ({step.name} ...)")
            if not is_subtype(self.closure, self.problem.objects[obj], t):
                raise ValueError(f"object {obj} has the wrong type for {var} in {step.name}")
        sub = dict(zip((v for v, _ in schema.parameters), step.args))
        return schema, substitute(schema.precondition, sub), sub

    def effect_changes(self, schema, sub, state, times):
        """(adds, deletes) of the effects at ``times``, conditions read in ``state``."""
        adds, dels = set(), set()
        for eff in schema.effects:
            if eff.literal.time not in times:
                continue
            names = [v for v, _ in eff.params]
            combos = itertools.product(*(self.objects(t) for _, t in eff.params)) if names else [()]
            for combo in combos:
                full = dict(sub)
                full.update(zip(names, combo))
                cond = substitute(eff.condition, full)
                if not self.holds(cond, state):
                    continue
                lit = substitute(eff.literal, full)
                (adds if lit.positive else dels).add((lit.predicate, lit.terms))
        return adds, dels


def validate(domain: Domain, problem: Problem, plan, epsilon=1) -> Verdict:
    """Accept or reject ``plan`` (text or parsed steps)."""
    steps = parse_plan(plan) if isinstance(plan, str) else list(plan)
    world = _World(domain, problem)
    try:
        if domain.durative:
            return _validate_temporal(world, steps, Fraction(epsilon))
        return _validate_sequential(world, steps)
    except ValueError as exc:
        return Verdict(False, str(exc))


def _text(step: PlanStep) -> str:
    return "(" + " ".join((step.name,) + step.args) + ")"


def _validate_sequential(world: _World, steps: list[PlanStep]) -> Verdict:
    state = set(world.problem.init)
    for step in sorted(steps, key=lambda s: s.time):
        schema, pre, sub = world.instantiate(step)
        bad = world.failing(pre, state)
        if bad is not None:
            return Verdict(False, f"step {step.time} {_text(step)}: precondition {bad} does not hold")
        adds, dels = world.effect_changes(schema, sub, state, {"s", "e", "i"})
        state = (state - dels) | adds
    bad = world.failing(world.problem.goal, state)
    if bad is not None:
        return Verdict(False, f"goal {bad} does not hold at the end of the plan")
    return Verdict(True)


@dataclass
class _Happening:
    time: Fraction
    step: int
    endpoint: str  # "s" or "e"
    conditions: object
    schema: object
    sub: dict


def _duration_ok(schema, d: Fraction):
    for c in schema.duration:
        if c.op == "=" and d != c.value:
            return c
        if c.op == "<=" and d > c.value:
            return c
        if c.op == ">=" and d < c.value:
            return c
    return None


def _validate_temporal(world: _World, steps: list[PlanStep], epsilon: Fraction) -> Verdict:
    happenings: list[_Happening] = []
    invariants = []
    for k, step in enumerate(steps):
        schema, pre, sub = world.instantiate(step)
        if step.time < 0:
            return Verdict(False, f"{_text(step)} starts before time 0")
        if schema.durative:
            if step.duration is None:
                return Verdict(False, f"{_text(step)} at {step.time}: missing duration")
            bad = _duration_ok(schema, step.duration)
            if bad is not None:
                return Verdict(
                    False,
                    f"{_text(step)} at {step.time}: duration {step.duration} violates ?duration {bad.op} {bad.value}",
                )
            end = step.time + step.duration
            happenings.append(_Happening(step.time, k, "s", (pre, {"s"}), schema, sub))
            happenings.append(_Happening(end, k, "e", (pre, {"e"}), schema, sub))
            invariants.append((step.time, end, pre, step))
        else:
            if step.duration not in (None, 0):
                return Verdict(False, f"{_text(step)} at {step.time}: instantaneous action given a duration")
            happenings.append(_Happening(step.time, k, "s", (pre, None), schema, sub))
    # interfering endpoints of different steps must be separated by epsilon
    touched = []
    for h in happenings:
        times = {"s"} if h.endpoint == "s" and h.schema.durative else {"s", "e", "i"} if not h.schema.durative else {"e"}
        reads = _atoms(world, h.conditions[0], h.conditions[1])
        adds, dels = world.effect_changes(h.schema, h.sub, _everything(), times)
        touched.append((h, reads, adds, dels))
    for (h1, r1, a1, d1), (h2, r2, a2, d2) in itertools.combinations(touched, 2):
        if h1.step == h2.step or abs(h1.time - h2.time) >= epsilon:
            continue
        clash = (a1 & d2) | (a2 & d1) | (r1 & (a2 | d2)) | (r2 & (a1 | d1))
        if clash:
            atom = sorted(clash)[0]
            return Verdict(
                False,
                f"{_text(steps[h1.step])} and {_text(steps[h2.step])} interfere on {atom_text(atom)} "
                f"at times {h1.time} and {h2.time} (closer than {epsilon})",
            )
    state = set(world.problem.init)
    timeline = sorted({h.time for h in happenings})
    for t in timeline:
        now = [h for h in happenings if h.time == t]
        for h in now:
            f, times = h.conditions
            bad = world.failing(f, state, times)
            if bad is not None:
                where = {"s": "start", "e": "end"}[h.endpoint] if h.schema.durative else "execution"
                return Verdict(False, f"{_text(steps[h.step])}: condition {bad} fails at {where} (time {t})")
        adds, dels = set(), set()
        for h in now:
            times = {"s", "e", "i"} if not h.schema.durative else {h.endpoint}
            a, d = world.effect_changes(h.schema, h.sub, state, times)
            adds |= a
            dels |= d
        state = (state - dels) | adds
        for start, end, pre, step in invariants:
            if start <= t < end:
                bad = world.failing(pre, state, {"i"})
                if bad is not None:
                    return Verdict(False, f"{_text(step)}: invariant {bad} fails after time {t}")
    bad = world.failing(world.problem.goal, state)
    if bad is not None:
        return Verdict(False, f"goal {bad} does not hold at the end of the plan")
    return Verdict(True)


class _Everything:
    """A state in which every atom holds: used to over-approximate effects."""

    def __contains__(self, item) -> bool:
        return True


def _everything():
    return _Everything()


def _atoms(world: _World, f, times) -> set:
    out = set()
    if isinstance(f, Literal):
        if (times is None or f.time in times) and f.predicate != EQUALITY:
            out.add((f.predicate, f.terms))
    elif isinstance(f, (And, Or)):
        for p in f.parts:
            out |= _atoms(world, p, times)
    elif isinstance(f, Not):
        out |= _atoms(world, f.body, times)
    elif isinstance(f, (Exists, Forall)):
        names = [v for v, _ in f.params]
        for combo in itertools.product(*(world.objects(t) for _, t in f.params)):
            out |= _atoms(world, substitute(f.body, dict(zip(names, combo))), times)
    return out
