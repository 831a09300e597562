"""Ordering stores over plan steps.

Both stores answer the same three questions about *time references*, pairs
``(step_id, endpoint)``: is one reference forced before another, can it
still be placed before, and what does the store look like after forcing it.
Step 0 is the initial dummy action and :data:`GOAL_ID` the final one.
"""

from __future__ import annotations

INIT_ID = 0
GOAL_ID = -1


class BitOrdering:
    """Transitive closure of step precedences as one successor bitmask per step.

    Used for classical (instantaneous) plans; endpoints are ignored.
    """

    __slots__ = ("succ",)

    def __init__(self, succ: tuple = (0,)):
        self.succ = succ  # index 0 is a placeholder for the initial step

    @property
    def size(self) -> int:
        return len(self.succ) - 1

    def add_step(self, duration=(), instantaneous: bool = False) -> BitOrdering:
        return BitOrdering(self.succ + (0,))

    def before(self, i: int, j: int) -> bool:
        """Closure query on real steps ``1..size``."""
        return bool((self.succ[i] >> j) & 1)

    def entails_before(self, a: tuple, b: tuple) -> bool:
        sa, sb = a[0], b[0]
        if sa == sb:
            return False
        if sa == INIT_ID or sb == GOAL_ID:
            return True
        if sa == GOAL_ID or sb == INIT_ID:
            return False
        return bool((self.succ[sa] >> sb) & 1)

    def possibly_before(self, a: tuple, b: tuple) -> bool:
        if a[0] == b[0]:
            return False
        return not self.entails_before(b, a)

    def add_before(self, a: tuple, b: tuple) -> BitOrdering | None:
        sa, sb = a[0], b[0]
        if sa == sb or sa == GOAL_ID or sb == INIT_ID:
            return None
        if sa == INIT_ID or sb == GOAL_ID:
            return self
        succ = self.succ
        if (succ[sb] >> sa) & 1:
            return None
        if (succ[sa] >> sb) & 1:
            return self
        mask = (1 << sb) | succ[sb]
        bit_a = 1 << sa
        new = list(succ)
        for x in range(1, len(succ)):
            if x == sa or succ[x] & bit_a:
                new[x] = succ[x] | mask
        return BitOrdering(tuple(new))

    def add_edge(self, i: int, j: int) -> BitOrdering | None:
        return self.add_before((i, "e"), (j, "s"))

    def topological_order(self) -> list[int]:
        """Steps 1..size, smallest id first among the unordered ones."""
        n = self.size
        remaining = set(range(1, n + 1))
        out: list[int] = []
        while remaining:
            for s in sorted(remaining):
                if not any(self.before(p, s) for p in remaining if p != s):
                    out.append(s)
                    remaining.discard(s)
                    break
        return out

    def longest_chain(self) -> int:
        """Number of steps on the longest precedence chain (parallel length)."""
        depth: dict[int, int] = {}
        for s in self.topological_order():
            preds = [depth[p] for p in depth if self.before(p, s)]
            depth[s] = 1 + max(preds, default=0)
        return max(depth.values(), default=0)

    def matrix(self) -> list[list[bool]]:
        n = self.size
        return [[self.before(i, j) for j in range(1, n + 1)] for i in range(1, n + 1)]
