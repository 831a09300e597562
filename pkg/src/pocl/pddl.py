"""PDDL reader and writer for the supported STRIPS/ADL/durative subset."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

from .formulas import (
    EQUALITY,
    TRUE,
    ActionSchema,
    And,
    Domain,
    DurationConstraint,
    Effect,
    Exists,
    Forall,
    Literal,
    Not,
    Or,
    Problem,
    free_variables,
    is_variable,
    literals,
    to_nnf,
)

SUPPORTED_REQUIREMENTS = frozenset(
    {
        ":strips",
        ":typing",
        ":equality",
        ":negative-preconditions",
        ":disjunctive-preconditions",
        ":existential-preconditions",
        ":universal-preconditions",
        ":quantified-preconditions",
        ":conditional-effects",
        ":adl",
        ":durative-actions",
    }
)

ROOT_TYPE = "object"


class PDDLError(Exception):
    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        where = f" at line {line}, column {column}" if line is not None else ""
        super().__init__(f"{message}{where}")


class Token(str):
    """A lower-cased symbol that remembers where it came from."""

    line: int
    column: int

    def __new__(cls, text: str, line: int, column: int):
        tok = super().__new__(cls, text.lower())
        tok.line = line
        tok.column = column
        return tok


class SList(list):
    line: int = 0
    column: int = 0


def read_sexprs(text: str) -> list:
    """Parse text into nested ``SList``/``Token`` structures."""
    stack: list[SList] = [SList()]
    line, col = 1, 1
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            line, col = line + 1, 1
            i += 1
            continue
        if ch.isspace():
            i += 1
            col += 1
            continue
        if ch == ";":
            while i < n and text[i] != "\n":
                i += 1
            continue
        if ch == "(":
            lst = SList()
            lst.line, lst.column = line, col
            stack[-1].append(lst)
            stack.append(lst)
            i += 1
            col += 1
            continue
        if ch == ")":
            if len(stack) == 1:
                raise PDDLError("unbalanced ')'", line, col)
            stack.pop()
            i += 1
            col += 1
            continue
        j = i
        while j < n and not text[j].isspace() and text[j] not in "();":
            j += 1
        stack[-1].append(Token(text[i:j], line, col))
        col += j - i
        i = j
    if len(stack) > 1:
        opened = stack[-1]
        raise PDDLError("unbalanced '(' opened", opened.line, opened.column)
    return list(stack[0])


def _pos(x) -> tuple:
    return getattr(x, "line", None), getattr(x, "column", None)


def _fail(message: str, where) -> PDDLError:
    return PDDLError(message, *_pos(where))


def _expect_list(x, what: str) -> SList:
    if not isinstance(x, list):
        raise _fail(f"expected {what}", x)
    return x


def _expect_symbol(x, what: str) -> Token:
    if isinstance(x, list):
        raise _fail(f"expected {what}", x)
    return x


def _typed_list(items: list, *, variables: bool) -> list[tuple]:
    """``a b - t c`` -> [(a, t), (b, t), (c, object)]."""
    out: list[tuple] = []
    pending: list = []
    k = 0
    while k < len(items):
        item = items[k]
        if not isinstance(item, list) and item == "-":
            if k + 1 >= len(items):
                raise _fail("type expected after '-'", item)
            type_spec = _type_spec(items[k + 1])
            out.extend((name, type_spec) for name in pending)
            pending = []
            k += 2
            continue
        name = _expect_symbol(item, "name")
        if variables and not is_variable(name):
            raise _fail(f"expected a variable, got {name!r}", name)
        if not variables and is_variable(name):
            raise _fail(f"unexpected variable {name!r}", name)
        pending.append(name)
        k += 1
    out.extend((name, ROOT_TYPE) for name in pending)
    return out


def _type_spec(x):
    if isinstance(x, list):
        if not x or x[0] != "either":
            raise _fail("malformed type", x)
        return tuple(str(_expect_symbol(t, "type name")) for t in x[1:])
    return str(x)


def _number(x) -> Fraction:
    try:
        return Fraction(str(x))
    except (ValueError, ZeroDivisionError):
        raise _fail(f"expected a number, got {x!r}", x) from None


class _DomainReader:
    def __init__(self) -> None:
        self.name = ""
        self.requirements: list[str] = []
        self.types: dict[str, object] = {}
        self.constants: dict[str, object] = {}
        self.predicates: dict[str, tuple] = {}
        self.actions: list[ActionSchema] = []

    # -- declarations ----------------------------------------------------
    def read(self, expr: list) -> Domain:
        if len(expr) < 2 or expr[0] != "define":
            raise _fail("expected (define ...)", expr)
        header = _expect_list(expr[1], "(domain name)")
        if len(header) != 2 or header[0] != "domain":
            raise _fail("expected (domain name)", header)
        self.name = str(header[1])
        for section in expr[2:]:
            section = _expect_list(section, "domain section")
            if not section:
                raise _fail("empty section", section)
            key = section[0]
            if key == ":requirements":
                self._requirements(section[1:])
            elif key == ":types":
                for name, parent in _typed_list(section[1:], variables=False):
                    self.types[str(name)] = parent
            elif key == ":constants":
                for name, t in _typed_list(section[1:], variables=False):
                    self._check_type(t, name)
                    self.constants[str(name)] = t
            elif key == ":predicates":
                for decl in section[1:]:
                    decl = _expect_list(decl, "predicate declaration")
                    pname = _expect_symbol(decl[0], "predicate name")
                    params = _typed_list(decl[1:], variables=True)
                    for v, t in params:
                        self._check_type(t, v)
                    self.predicates[str(pname)] = tuple((str(v), t) for v, t in params)
            elif key == ":action":
                self.actions.append(self._action(section, durative=False))
            elif key == ":durative-action":
                self.actions.append(self._action(section, durative=True))
            elif key in (":functions", ":derived", ":axiom"):
                raise _fail(f"unsupported domain section {key}", key)
            else:
                raise _fail(f"unknown domain section {key}", key)
        for t, parent in self.types.items():
            self._check_type(parent, t)
        return Domain(
            name=self.name,
            requirements=tuple(self.requirements),
            types=dict(self.types),
            constants=dict(self.constants),
            predicates=dict(self.predicates),
            actions=tuple(self.actions),
        )

    def _requirements(self, flags: list) -> None:
        for flag in flags:
            flag = _expect_symbol(flag, "requirement flag")
            if flag not in SUPPORTED_REQUIREMENTS:
                raise _fail(f"unsupported requirement {flag}", flag)
            self.requirements.append(str(flag))

    def _check_type(self, t, where) -> None:
        names = t if isinstance(t, tuple) else (t,)
        for name in names:
            if name != ROOT_TYPE and name not in self.types:
                raise _fail(f"undeclared type {name!r}", where)

    # -- actions ---------------------------------------------------------
    def _action(self, section: list, *, durative: bool) -> ActionSchema:
        name = str(_expect_symbol(section[1], "action name")) if len(section) > 1 else None
        if name is None:
            raise _fail("action name expected", section)
        fields: dict[str, object] = {}
        k = 2
        while k < len(section):
            key = _expect_symbol(section[k], "action keyword")
            if k + 1 >= len(section):
                raise _fail(f"value expected after {key}", key)
            fields[str(key)] = section[k + 1]
            k += 2
        allowed = {":parameters", ":precondition", ":effect"}
        if durative:
            allowed = {":parameters", ":duration", ":condition", ":effect"}
        for key in fields:
            if key not in allowed:
                raise _fail(f"unexpected keyword {key} in {name}", section)
        params = _typed_list(_expect_list(fields.get(":parameters", SList()), "parameter list"), variables=True)
        for v, t in params:
            self._check_type(t, v)
        scope = {str(v): t for v, t in params}
        params_t = tuple((str(v), t) for v, t in params)

        cond_key = ":condition" if durative else ":precondition"
        precondition = TRUE
        if cond_key in fields:
            raw = fields[cond_key]
            if isinstance(raw, list) and not raw:
                precondition = TRUE
            else:
                precondition = self._condition(raw, scope, "s", durative=durative, timed=False)
        precondition = to_nnf(precondition)

        effects: list[Effect] = []
        if ":effect" in fields:
            raw = fields[":effect"]
            if not (isinstance(raw, list) and not raw):
                self._effects(raw, scope, effects, durative=durative, time="e", params=(), condition=TRUE)

        duration: tuple = ()
        if durative:
            if ":duration" not in fields:
                raise _fail(f"durative action {name} lacks :duration", section)
            duration = tuple(self._duration(fields[":duration"]))
        return ActionSchema(name, params_t, precondition, tuple(effects), duration, durative)

    def _duration(self, expr) -> list[DurationConstraint]:
        expr = _expect_list(expr, "duration constraint")
        if not expr:
            return []
        if expr[0] == "and":
            out: list[DurationConstraint] = []
            for part in expr[1:]:
                out.extend(self._duration(part))
            return out
        op = str(expr[0])
        if op not in ("=", "<=", ">=") or len(expr) != 3 or expr[1] != "?duration":
            raise _fail("unsupported duration constraint", expr)
        if isinstance(expr[2], list):
            raise _fail("duration must be a constant", expr[2])
        value = _number(expr[2])
        if value < 0:
            raise _fail("duration constant must be nonnegative", expr[2])
        return [DurationConstraint(op, value)]

    # -- formulas --------------------------------------------------------
    def _condition(self, expr, scope: dict, time: str, *, durative: bool, timed: bool):
        expr = _expect_list(expr, "condition")
        if not expr:
            return TRUE
        head = expr[0]
        if isinstance(head, list):
            raise _fail("malformed condition", expr)
        if durative and head in ("at", "over"):
            if len(expr) != 3:
                raise _fail("malformed timed condition", expr)
            spec = (str(head), str(expr[1]))
            t = {("at", "start"): "s", ("over", "all"): "i", ("at", "end"): "e"}.get(spec)
            if t is None:
                raise _fail(f"unknown time specifier {' '.join(spec)}", expr)
            return self._condition(expr[2], scope, t, durative=durative, timed=True)
        if head == "and":
            return And(tuple(self._condition(p, scope, time, durative=durative, timed=timed) for p in expr[1:]))
        if head == "or":
            return Or(tuple(self._condition(p, scope, time, durative=durative, timed=timed) for p in expr[1:]))
        if head == "not":
            if len(expr) != 2:
                raise _fail("not takes one argument", expr)
            return Not(self._condition(expr[1], scope, time, durative=durative, timed=timed))
        if head == "imply":
            if len(expr) != 3:
                raise _fail("imply takes two arguments", expr)
            a = self._condition(expr[1], scope, time, durative=durative, timed=timed)
            b = self._condition(expr[2], scope, time, durative=durative, timed=timed)
            return Or((Not(a), b))
        if head in ("exists", "forall"):
            if len(expr) != 3:
                raise _fail(f"malformed {head}", expr)
            qparams = _typed_list(_expect_list(expr[1], "variable list"), variables=True)
            inner = dict(scope)
            for v, t in qparams:
                self._check_type(t, v)
                inner[str(v)] = t
            body = self._condition(expr[2], inner, time, durative=durative, timed=timed)
            params = tuple((str(v), t) for v, t in qparams)
            return Exists(params, body) if head == "exists" else Forall(params, body)
        if durative and not timed:
            raise _fail("durative condition lacks a time specifier", expr)
        return self._atom(expr, scope, time)

    def _atom(self, expr: list, scope: dict, time: str) -> Literal:
        pred = _expect_symbol(expr[0], "predicate")
        terms = []
        for t in expr[1:]:
            t = _expect_symbol(t, "term")
            if is_variable(t):
                if t not in scope:
                    raise _fail(f"unbound variable {t}", t)
            elif t not in self.constants:
                raise _fail(f"undeclared constant {t!r}", t)
            terms.append(str(t))
        if pred == EQUALITY:
            if len(terms) != 2:
                raise _fail("equality takes two terms", expr)
        else:
            if pred not in self.predicates:
                raise _fail(f"undeclared predicate {pred!r}", pred)
            if len(self.predicates[pred]) != len(terms):
                raise _fail(f"wrong number of arguments for {pred}", expr)
        return Literal(str(pred), tuple(terms), True, time)

    def _effects(self, expr, scope, out: list, *, durative: bool, time: str, params: tuple, condition) -> None:
        expr = _expect_list(expr, "effect")
        if not expr:
            return
        head = expr[0]
        if head == "and":
            for part in expr[1:]:
                self._effects(part, scope, out, durative=durative, time=time, params=params, condition=condition)
            return
        if durative and head == "at" and len(expr) == 3 and expr[1] in ("start", "end"):
            t = "s" if expr[1] == "start" else "e"
            self._effects(expr[2], scope, out, durative=durative, time=t, params=params, condition=condition)
            return
        if head == "forall":
            if len(expr) != 3:
                raise _fail("malformed forall effect", expr)
            qparams = _typed_list(_expect_list(expr[1], "variable list"), variables=True)
            inner = dict(scope)
            for v, t in qparams:
                self._check_type(t, v)
                inner[str(v)] = t
            new_params = params + tuple((str(v), t) for v, t in qparams)
            self._effects(expr[2], inner, out, durative=durative, time=time, params=new_params, condition=condition)
            return
        if head == "when":
            if len(expr) != 3:
                raise _fail("malformed conditional effect", expr)
            cond_time = time if durative else "s"
            cond = self._condition(expr[1], scope, cond_time, durative=durative, timed=True)
            merged = to_nnf(cond) if condition == TRUE else And((condition, to_nnf(cond)))
            self._effects(expr[2], scope, out, durative=durative, time=time, params=params, condition=merged)
            return
        if head in ("increase", "decrease", "assign", "scale-up", "scale-down"):
            raise _fail("numeric effects are not supported", expr)
        if durative and time not in ("s", "e"):
            raise _fail("durative effect lacks a time specifier", expr)
        positive = True
        atom = expr
        if head == "not":
            positive = False
            atom = _expect_list(expr[1], "atom")
        lit = self._atom(atom, scope, time)
        if lit.predicate == EQUALITY:
            raise _fail("equality cannot be an effect", expr)
        out.append(Effect(Literal(lit.predicate, lit.terms, positive, time), condition, params))


def parse_domain(text: str) -> Domain:
    exprs = read_sexprs(text)
    if len(exprs) != 1:
        raise PDDLError("expected exactly one (define (domain ...)) form", *_pos(exprs[1] if exprs else None))
    return _DomainReader().read(exprs[0])


# ---------------------------------------------------------------------------
# problems


def type_closure(domain: Domain) -> dict[str, set[str]]:
    """Map each type name to the set containing it and all its ancestors."""
    out: dict[str, set[str]] = {ROOT_TYPE: {ROOT_TYPE}}

    def ancestors(t: str, seen: frozenset) -> set[str]:
        if t in out:
            return out[t]
        if t in seen:
            raise PDDLError(f"cyclic type hierarchy at {t!r}")
        acc = {t, ROOT_TYPE}
        parent = domain.types.get(t, ROOT_TYPE)
        for p in parent if isinstance(parent, tuple) else (parent,):
            acc |= ancestors(p, seen | {t})
        out[t] = acc
        return acc

    for t in domain.types:
        ancestors(t, frozenset())
    return out


def is_subtype(closure: dict, object_type, required) -> bool:
    req = required if isinstance(required, tuple) else (required,)
    have = object_type if isinstance(object_type, tuple) else (object_type,)
    return all(any(r in closure.get(h, {h, ROOT_TYPE}) for r in req) for h in have)


def objects_by_type(domain: Domain, objects: dict) -> dict[str, tuple[str, ...]]:
    closure = type_closure(domain)
    table: dict[str, list[str]] = {t: [] for t in closure}
    for obj in sorted(objects):
        for anc in closure.get(objects[obj], {objects[obj], ROOT_TYPE}):
            table.setdefault(anc, []).append(obj)
    return {t: tuple(v) for t, v in table.items()}


def parse_problem(text: str, domain: Domain) -> Problem:
    exprs = read_sexprs(text)
    if len(exprs) != 1:
        raise PDDLError("expected exactly one (define (problem ...)) form")
    expr = exprs[0]
    if len(expr) < 2 or expr[0] != "define":
        raise _fail("expected (define ...)", expr)
    header = _expect_list(expr[1], "(problem name)")
    if len(header) != 2 or header[0] != "problem":
        raise _fail("expected (problem name)", header)
    name = str(header[1])
    domain_name = domain.name
    objects: dict[str, object] = dict(domain.constants)
    init_exprs: list = []
    goal_expr = None
    reader = _DomainReader()
    reader.types = dict(domain.types)
    reader.predicates = dict(domain.predicates)
    for section in expr[2:]:
        section = _expect_list(section, "problem section")
        key = section[0] if section else None
        if key == ":domain":
            domain_name = str(section[1])
            if domain_name != domain.name:
                raise _fail(f"problem is for domain {domain_name!r}, not {domain.name!r}", section[1])
        elif key == ":requirements":
            reader._requirements(section[1:])
        elif key == ":objects":
            for obj, t in _typed_list(section[1:], variables=False):
                reader._check_type(t, obj)
                objects[str(obj)] = t
        elif key == ":init":
            init_exprs = list(section[1:])
        elif key == ":goal":
            if len(section) != 2:
                raise _fail("malformed goal", section)
            goal_expr = section[1]
        elif key == ":metric":
            continue  # plan metrics are ignored
        else:
            raise _fail(f"unknown problem section {key}", section)
    reader.constants = objects
    closure = type_closure(domain)

    def check_types(lit: Literal, where) -> None:
        if lit.predicate == EQUALITY:
            return
        for term, (_, required) in zip(lit.terms, domain.predicates[lit.predicate]):
            if is_variable(term):
                continue
            if not is_subtype(closure, objects[term], required):
                raise _fail(f"type mismatch: {term!r} is not a {required} in {lit}", where)

    init = set()
    for item in init_exprs:
        item = _expect_list(item, "initial atom")
        if item and item[0] in ("not", "="):
            raise _fail("initial conditions must be positive atoms", item)
        if item and any(isinstance(t, list) for t in item):
            raise _fail("numeric initial values are not supported", item)
        lit = reader._atom(item, {}, "s")
        check_types(lit, item)
        init.add(lit.atom)
    goal = TRUE
    if goal_expr is not None and not (isinstance(goal_expr, list) and not goal_expr):
        goal = to_nnf(reader._condition(goal_expr, {}, "s", durative=False, timed=False))
        for lit in literals(goal):
            check_types(lit, goal_expr)
    return Problem(name, domain_name, objects, frozenset(init), goal)


# ---------------------------------------------------------------------------
# writer


def _typed_text(params: Iterable[tuple]) -> str:
    parts = []
    for name, t in params:
        tt = t if isinstance(t, str) else "(either " + " ".join(t) + ")"
        parts.append(f"{name} - {tt}")
    return " ".join(parts)


_TIME_WORDS = {"s": "at start", "i": "over all", "e": "at end"}


def formula_text(f, *, timed: bool = False) -> str:
    if isinstance(f, Literal):
        body = "(" + " ".join((f.predicate, *f.terms)) + ")"
        if not f.positive:
            body = f"(not {body})"
        return f"({_TIME_WORDS[f.time]} {body})" if timed else body
    if isinstance(f, And):
        return "(and" + "".join(" " + formula_text(p, timed=timed) for p in f.parts) + ")"
    if isinstance(f, Or):
        return "(or" + "".join(" " + formula_text(p, timed=timed) for p in f.parts) + ")"
    if isinstance(f, Not):
        return f"(not {formula_text(f.body, timed=timed)})"
    word = "exists" if isinstance(f, Exists) else "forall"
    return f"({word} ({_typed_text(f.params)}) {formula_text(f.body, timed=timed)})"


def _effect_text(e: Effect, durative: bool) -> str:
    body = formula_text(e.literal)
    if durative:
        body = f"({_TIME_WORDS[e.time]} {body})"
    if e.condition != TRUE:
        body = f"(when {formula_text(e.condition, timed=durative)} {body})"
    if e.params:
        body = f"(forall ({_typed_text(e.params)}) {body})"
    return body


def write_domain(domain: Domain) -> str:
    lines = [f"(define (domain {domain.name})"]
    if domain.requirements:
        lines.append("  (:requirements " + " ".join(domain.requirements) + ")")
    if domain.types:
        items = []
        for t, parent in domain.types.items():
            items.append(_typed_text([(t, parent)]))
        lines.append("  (:types " + " ".join(items) + ")")
    if domain.constants:
        lines.append("  (:constants " + _typed_text(domain.constants.items()) + ")")
    lines.append("  (:predicates")
    for pred, params in domain.predicates.items():
        inner = _typed_text(params)
        lines.append(f"    ({pred}{' ' + inner if inner else ''})")
    lines.append("  )")
    for a in domain.actions:
        kind = ":durative-action" if a.durative else ":action"
        lines.append(f"  ({kind} {a.name}")
        lines.append(f"    :parameters ({_typed_text(a.parameters)})")
        if a.durative:
            cons = [f"({c.op} ?duration {c.value})" for c in a.duration]
            dur = cons[0] if len(cons) == 1 else "(and " + " ".join(cons) + ")"
            lines.append(f"    :duration {dur}")
            lines.append(f"    :condition {formula_text(a.precondition, timed=True)}")
        else:
            lines.append(f"    :precondition {formula_text(a.precondition)}")
        effs = " ".join(_effect_text(e, a.durative) for e in a.effects)
        lines.append(f"    :effect (and {effs}))")
    lines.append(")")
    return "\n".join(lines) + "\n"


def write_problem(problem: Problem, domain: Domain) -> str:
    objs = {o: t for o, t in problem.objects.items() if o not in domain.constants}
    lines = [f"(define (problem {problem.name})", f"  (:domain {problem.domain_name})"]
    if objs:
        lines.append("  (:objects " + _typed_text(objs.items()) + ")")
    lines.append("  (:init")
    for pred, terms in sorted(problem.init):
        lines.append("    (" + " ".join((pred, *terms)) + ")")
    lines.append("  )")
    lines.append(f"  (:goal {formula_text(problem.goal)})")
    lines.append(")")
    return "\n".join(lines) + "\n"


def check_schema_scopes(domain: Domain) -> None:
    """Every free variable of a precondition must be an action parameter."""
    for a in domain.actions:
        params = {v for v, _ in a.parameters}
        extra = free_variables(a.precondition) - params
        if extra:
            raise PDDLError(f"action {a.name} uses undeclared variables {sorted(extra)}")
