"""Formula AST shared by the parser, grounder, heuristic and planner.

Terms are plain strings; variables start with ``?``.  Every literal carries a
temporal annotation: ``s`` (at start), ``i`` (over all) or ``e`` (at end).
Classical preconditions are all ``s`` and classical effects all ``e``.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Union

Atom = tuple  # (predicate, terms)
TypeSpec = Union[str, tuple]  # a type name, or a tuple of names for ``either``

EQUALITY = "="


def is_variable(term: str) -> bool:
    return term.startswith("?")


@dataclass(frozen=True)
class Literal:
    predicate: str
    terms: tuple[str, ...] = ()
    positive: bool = True
    time: str = "s"

    @property
    def atom(self) -> Atom:
        return (self.predicate, self.terms)

    @property
    def key(self) -> tuple:
        return (self.predicate, self.terms, self.positive)

    def negate(self) -> Literal:
        return replace(self, positive=not self.positive)

    def is_ground(self) -> bool:
        return not any(is_variable(t) for t in self.terms)

    def __str__(self) -> str:
        return literal_text(self.predicate, self.terms, self.positive)


@dataclass(frozen=True)
class And:
    parts: tuple = ()


@dataclass(frozen=True)
class Or:
    parts: tuple = ()


@dataclass(frozen=True)
class Not:
    body: object


@dataclass(frozen=True)
class Exists:
    params: tuple  # ((var, type), ...)
    body: object


@dataclass(frozen=True)
class Forall:
    params: tuple
    body: object


Formula = Union[Literal, And, Or, Not, Exists, Forall]

TRUE = And(())
FALSE = Or(())


@dataclass(frozen=True)
class Effect:
    """A (possibly conditional, possibly universally quantified) effect literal.

    ``literal.time`` is the endpoint at which the effect happens.
    """

    literal: Literal
    condition: object = TRUE
    params: tuple = ()  # universally quantified effect variables

    @property
    def time(self) -> str:
        return self.literal.time


@dataclass(frozen=True)
class DurationConstraint:
    op: str  # "=", "<=", ">="
    value: Fraction


@dataclass(frozen=True)
class ActionSchema:
    name: str
    parameters: tuple  # ((var, type), ...)
    precondition: object = TRUE
    effects: tuple = ()
    duration: tuple = ()  # DurationConstraint, ...
    durative: bool = False


@dataclass(frozen=True)
class Domain:
    name: str
    requirements: tuple = ()
    types: Mapping = field(default_factory=dict)  # type -> parent TypeSpec
    constants: Mapping = field(default_factory=dict)  # name -> type
    predicates: Mapping = field(default_factory=dict)  # name -> ((var, type), ...)
    actions: tuple = ()

    @property
    def durative(self) -> bool:
        return any(a.durative for a in self.actions)

    def action(self, name: str) -> ActionSchema:
        for schema in self.actions:
            if schema.name == name:
                return schema
        raise KeyError(name)


@dataclass(frozen=True)
class Problem:
    name: str
    domain_name: str
    objects: Mapping = field(default_factory=dict)  # name -> type, domain constants included
    init: frozenset = frozenset()  # of Atom
    goal: object = TRUE


# ---------------------------------------------------------------------------
# text helpers


def literal_text(predicate: str, terms: Iterable[str], positive: bool = True) -> str:
    inner = "(" + " ".join((predicate, *terms)) + ")"
    return inner if positive else f"(not {inner})"


def atom_text(atom: Atom) -> str:
    return literal_text(atom[0], atom[1])


# ---------------------------------------------------------------------------
# structural operations


def to_nnf(f, negate: bool = False):
    """Push negations down to literals (double negation, De Morgan, duality)."""
    if isinstance(f, Literal):
        return f.negate() if negate else f
    if isinstance(f, Not):
        return to_nnf(f.body, not negate)
    if isinstance(f, And):
        parts = tuple(to_nnf(p, negate) for p in f.parts)
        return Or(parts) if negate else And(parts)
    if isinstance(f, Or):
        parts = tuple(to_nnf(p, negate) for p in f.parts)
        return And(parts) if negate else Or(parts)
    if isinstance(f, Exists):
        body = to_nnf(f.body, negate)
        return Forall(f.params, body) if negate else Exists(f.params, body)
    if isinstance(f, Forall):
        body = to_nnf(f.body, negate)
        return Exists(f.params, body) if negate else Forall(f.params, body)
    raise TypeError(f"not a formula: {f!r}")


def is_nnf(f) -> bool:
    if isinstance(f, Literal):
        return True
    if isinstance(f, Not):
        return False
    if isinstance(f, (And, Or)):
        return all(is_nnf(p) for p in f.parts)
    return is_nnf(f.body)


def literals(f) -> Iterator[Literal]:
    if isinstance(f, Literal):
        yield f
    elif isinstance(f, (And, Or)):
        for p in f.parts:
            yield from literals(p)
    elif isinstance(f, Not):
        yield from literals(f.body)
    else:
        yield from literals(f.body)


def free_variables(f, bound: frozenset = frozenset()) -> set[str]:
    if isinstance(f, Literal):
        return {t for t in f.terms if is_variable(t) and t not in bound}
    if isinstance(f, (And, Or)):
        out: set[str] = set()
        for p in f.parts:
            out |= free_variables(p, bound)
        return out
    if isinstance(f, Not):
        return free_variables(f.body, bound)
    inner = bound | {v for v, _ in f.params}
    return free_variables(f.body, inner)


def substitute(f, sub: Mapping[str, str]):
    """Replace variables according to ``sub``; quantified variables shadow."""
    if not sub:
        return f
    if isinstance(f, Literal):
        if not any(t in sub for t in f.terms):
            return f
        return replace(f, terms=tuple(sub.get(t, t) for t in f.terms))
    if isinstance(f, And):
        return And(tuple(substitute(p, sub) for p in f.parts))
    if isinstance(f, Or):
        return Or(tuple(substitute(p, sub) for p in f.parts))
    if isinstance(f, Not):
        return Not(substitute(f.body, sub))
    shadowed = {v for v, _ in f.params}
    inner = {k: v for k, v in sub.items() if k not in shadowed}
    return type(f)(f.params, substitute(f.body, inner))


def substitute_effect(effect: Effect, sub: Mapping[str, str]) -> Effect:
    return Effect(
        substitute(effect.literal, sub),
        substitute(effect.condition, sub),
        effect.params,
    )


def restrict_times(f, times: frozenset):
    """Keep only literals annotated with one of ``times``; drop the rest as TRUE."""
    if isinstance(f, Literal):
        return f if f.time in times else TRUE
    if isinstance(f, And):
        return And(tuple(restrict_times(p, times) for p in f.parts))
    if isinstance(f, Or):
        return Or(tuple(restrict_times(p, times) for p in f.parts))
    if isinstance(f, Not):
        return Not(restrict_times(f.body, times))
    return type(f)(f.params, restrict_times(f.body, times))


def with_time(f, time: str):
    if isinstance(f, Literal):
        return replace(f, time=time)
    if isinstance(f, (And, Or)):
        return type(f)(tuple(with_time(p, time) for p in f.parts))
    if isinstance(f, Not):
        return Not(with_time(f.body, time))
    return type(f)(f.params, with_time(f.body, time))


def simplify(f):
    """Evaluate ground equality atoms and flatten/short-circuit connectives."""
    if isinstance(f, Literal):
        if f.predicate == EQUALITY and f.is_ground():
            same = f.terms[0] == f.terms[1]
            return TRUE if same == f.positive else FALSE
        return f
    if isinstance(f, And):
        parts = []
        for p in f.parts:
            p = simplify(p)
            if p == FALSE:
                return FALSE
            if isinstance(p, And):
                parts.extend(p.parts)
            else:
                parts.append(p)
        return parts[0] if len(parts) == 1 else And(tuple(parts))
    if isinstance(f, Or):
        parts = []
        for p in f.parts:
            p = simplify(p)
            if p == TRUE:
                return TRUE
            if isinstance(p, Or):
                parts.extend(p.parts)
            else:
                parts.append(p)
        return parts[0] if len(parts) == 1 else Or(tuple(parts))
    if isinstance(f, Not):
        return Not(simplify(f.body))
    body = simplify(f.body)
    if body == TRUE or body == FALSE:
        return body
    return type(f)(f.params, body)


def conjuncts(f) -> list:
    """Split a formula into its top-level conjuncts (TRUE yields none)."""
    if isinstance(f, And):
        out = []
        for p in f.parts:
            out.extend(conjuncts(p))
        return out
    return [f]
