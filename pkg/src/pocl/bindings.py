"""Persistent codesignation / non-codesignation constraints over variables.

Ground-mode planning only ever sees :data:`EMPTY`; every operation on ground
literals reduces to syntactic equality.
"""

from __future__ import annotations

from typing import Iterable, Iterator, Mapping

from .formulas import Literal, is_variable


class BindingSet:
    """Immutable union-find with per-class domains and exclusions.

    ``_parent`` maps non-root variables to a term one step closer to the root;
    constants are always roots.  ``_domain`` maps root variables to the set of
    constants they may still take.  ``_neq`` holds the symmetric
    non-codesignation relation between roots.
    """

    __slots__ = ("_parent", "_domain", "_neq")

    def __init__(self, parent=None, domain=None, neq=None):
        self._parent: Mapping[str, str] = parent or {}
        self._domain: Mapping[str, frozenset] = domain or {}
        self._neq: Mapping[str, frozenset] = neq or {}

    # -- queries ---------------------------------------------------------
    def find(self, term: str) -> str:
        parent = self._parent
        while term in parent:
            term = parent[term]
        return term

    def value(self, term: str) -> str | None:
        root = self.find(term)
        return None if is_variable(root) else root

    def domain(self, term: str) -> frozenset | None:
        root = self.find(term)
        if not is_variable(root):
            return frozenset((root,))
        return self._domain.get(root)

    def variables(self) -> set[str]:
        out = set(self._parent) | set(self._domain)
        for k, vs in self._neq.items():
            out.add(k)
            out |= vs
        return {v for v in out if is_variable(v)}

    def distinct(self, a: str, b: str) -> bool:
        """True if ``a`` and ``b`` are constrained never to codesignate."""
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if not is_variable(ra) and not is_variable(rb):
            return True
        if rb in self._neq.get(ra, ()):
            return True
        for var, const in ((ra, rb), (rb, ra)):
            if is_variable(var) and not is_variable(const):
                dom = self._domain.get(var)
                if dom is not None and const not in dom:
                    return True
        if is_variable(ra) and is_variable(rb):
            da, db = self._domain.get(ra), self._domain.get(rb)
            if da is not None and db is not None and not (da & db):
                return True
        return False

    def is_empty(self) -> bool:
        return not (self._parent or self._domain or self._neq)

    # -- updates ---------------------------------------------------------
    def declare(self, variables: Iterable[tuple[str, Iterable[str]]]) -> BindingSet | None:
        """Introduce fresh variables with their admissible constants."""
        domain = dict(self._domain)
        for var, objs in variables:
            objs = frozenset(objs)
            if not objs:
                return None
            domain[var] = objs
        return BindingSet(self._parent, domain, self._neq)

    def unify_terms(self, pairs: Iterable[tuple[str, str]]) -> BindingSet | None:
        parent = domain = neq = None
        cur = self
        for a, b in pairs:
            ra, rb = cur.find(a), cur.find(b)
            if ra == rb:
                continue
            a_var, b_var = is_variable(ra), is_variable(rb)
            if not a_var and not b_var:
                return None
            if rb in cur._neq.get(ra, ()):
                return None
            if not a_var:  # keep the constant as root
                ra, rb = rb, ra
                a_var, b_var = b_var, a_var
            # merge ra (a variable) into rb
            if parent is None:
                parent, domain, neq = dict(cur._parent), dict(cur._domain), dict(cur._neq)
            da = domain.get(ra)
            if b_var:
                db = domain.get(rb)
                if da is not None and db is not None:
                    merged = da & db
                elif da is not None:
                    merged = da
                else:
                    merged = db
                if merged is not None:
                    if not merged:
                        return None
                    domain[rb] = merged
            elif da is not None and rb not in da:
                return None
            domain.pop(ra, None)
            parent[ra] = rb
            moved = neq.pop(ra, frozenset())
            if moved:
                if rb in moved:
                    return None
                neq[rb] = neq.get(rb, frozenset()) | moved
                for other in moved:
                    neq[other] = (neq[other] - {ra}) | {rb}
                    other_dom = domain.get(other)
                    if not b_var and other_dom is not None and rb in other_dom:
                        if len(other_dom) == 1:
                            return None
                        domain[other] = other_dom - {rb}
                cur_dom = domain.get(rb)
                if cur_dom is not None:
                    pruned = cur_dom - {c for c in moved if not is_variable(c)}
                    if not pruned:
                        return None
                    domain[rb] = pruned
            cur = BindingSet(parent, domain, neq)
        return cur

    def add_neq(self, a: str, b: str) -> BindingSet | None:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return None
        a_var, b_var = is_variable(ra), is_variable(rb)
        if not a_var and not b_var:
            return self
        if rb in self._neq.get(ra, ()):
            return self
        neq = dict(self._neq)
        neq[ra] = neq.get(ra, frozenset()) | {rb}
        neq[rb] = neq.get(rb, frozenset()) | {ra}
        domain = self._domain
        for var, const in ((ra, rb), (rb, ra)):
            if is_variable(var) and not is_variable(const):
                dom = domain.get(var)
                if dom is not None and const in dom:
                    if len(dom) == 1:
                        return None
                    domain = dict(domain)
                    domain[var] = dom - {const}
        return BindingSet(self._parent, domain, neq)

    # -- structure -------------------------------------------------------
    def classes(self) -> list[frozenset]:
        groups: dict[str, set] = {}
        for v in set(self._parent) | set(self._parent.values()):
            groups.setdefault(self.find(v), set()).add(v)
        return [frozenset(g) for g in groups.values()]

    def canonical(self) -> tuple:
        classes = frozenset(c for c in self.classes())
        neq = frozenset(
            frozenset((self._class_key(a), self._class_key(b)))
            for a, bs in self._neq.items()
            for b in bs
        )
        domains = frozenset((self._class_key(v), d) for v, d in self._domain.items())
        return classes, neq, domains

    def _class_key(self, term: str) -> frozenset:
        root = self.find(term)
        members = {root} | {v for v in self._parent if self.find(v) == root}
        return frozenset(members)

    def __eq__(self, other) -> bool:
        if not isinstance(other, BindingSet):
            return NotImplemented
        return self.canonical() == other.canonical()

    def __hash__(self) -> int:
        return hash(self.canonical())

    def __repr__(self) -> str:
        return f"BindingSet(classes={self.classes()}, neq={dict(self._neq)})"

    def audit(self) -> None:
        """Raise AssertionError if any structural invariant is broken."""
        for cls in self.classes():
            consts = [t for t in cls if not is_variable(t)]
            assert len(consts) <= 1, f"class with two constants: {cls}"
        for a, bs in self._neq.items():
            assert self.find(a) == a, f"non-root {a} in exclusions"
            assert a not in bs, f"{a} excluded from itself"
            for b in bs:
                assert self.find(b) == b, f"non-root {b} in exclusions"
                assert a in self._neq.get(b, ()), "exclusions not symmetric"
        for v, dom in self._domain.items():
            assert self.find(v) == v, f"domain stored on non-root {v}"
            assert dom, f"empty domain for {v}"
        for v in self._parent:
            assert is_variable(v), f"constant {v} is not a root"

    def assignments(self, variables: Iterable[str]) -> Iterator[dict[str, str]]:
        """Enumerate ground assignments of ``variables`` consistent with all
        constraints (used to instantiate a finished lifted plan)."""
        roots: list[str] = []
        for v in variables:
            r = self.find(v)
            if is_variable(r) and r not in roots:
                roots.append(r)
        chosen: dict[str, str] = {}

        def ok(root: str, const: str) -> bool:
            for other in self._neq.get(root, ()):
                if other == const:
                    return False
                if other in chosen and chosen[other] == const:
                    return False
            return True

        def rec(k: int) -> Iterator[dict]:
            if k == len(roots):
                yield {v: (chosen[self.find(v)] if is_variable(self.find(v)) else self.find(v)) for v in variables}
                return
            root = roots[k]
            for const in sorted(self._domain.get(root, ())):
                if ok(root, const):
                    chosen[root] = const
                    yield from rec(k + 1)
                    del chosen[root]

        variables = list(variables)
        yield from rec(0)


EMPTY = BindingSet()


def unify(l1: Literal, l2: Literal, b: BindingSet = EMPTY, *, negated: bool = False) -> BindingSet | None:
    """Extend ``b`` so that ``l1`` and ``l2`` (or its negation) codesignate."""
    if l1.predicate != l2.predicate or len(l1.terms) != len(l2.terms):
        return None
    if (l1.positive == l2.positive) == negated:
        return None
    if l1.terms == l2.terms:
        return b
    if b.is_empty() and l1.is_ground() and l2.is_ground():
        return None
    return b.unify_terms(zip(l1.terms, l2.terms))


def separation_refinements(effect: Literal, condition: Literal, b: BindingSet) -> list[BindingSet]:
    """Binding sets that each prevent ``effect`` from unifying with ``condition``."""
    out: list[BindingSet] = []
    seen: set = set()
    for s, t in zip(effect.terms, condition.terms):
        rs, rt = b.find(s), b.find(t)
        if rs == rt or not (is_variable(rs) or is_variable(rt)):
            continue
        pair = frozenset((rs, rt))
        if pair in seen:
            continue
        seen.add(pair)
        refined = b.add_neq(rs, rt)
        if refined is not None:
            out.append(refined)
    return out
