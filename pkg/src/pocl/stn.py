"""Simple temporal network kept as a complete shortest-distance matrix.

Time point 0 is time zero; step ``i`` owns start point ``2i-1`` and end point
``2i``.  ``d[i][j]`` bounds ``t_j - t_i`` from above.  Values are ints or
``Fraction`` so results are exact; ``INF`` marks an absent bound.

Operations return a new graph, or ``None`` when the network becomes
inconsistent.  Rows that a tightening does not touch are shared with the
parent graph.
"""

from __future__ import annotations

import math
from fractions import Fraction
from numbers import Rational

from .ordering import GOAL_ID, INIT_ID

INF = math.inf


def exact(x):
    """Normalize a rational to int when integral."""
    if isinstance(x, float):
        if math.isinf(x):
            return x
        x = Fraction(x).limit_denominator(10**9)
    if isinstance(x, Rational) and not isinstance(x, int):
        x = Fraction(x)
        return int(x) if x.denominator == 1 else x
    return x


class DGraph:
    __slots__ = ("rows", "epsilon")

    def __init__(self, rows: tuple = ((0,),), epsilon=1):
        self.rows = rows
        self.epsilon = exact(epsilon)

    @property
    def size(self) -> int:
        return len(self.rows)

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    def matrix(self) -> list[list]:
        return [list(r) for r in self.rows]

    # -- construction ----------------------------------------------------
    def tighten(self, u: int, v: int, w) -> DGraph | None:
        """Assert ``t_v - t_u <= w`` and restore all shortest distances.

        Only rows ``i`` with ``d[i][u] + w < d[i][v]`` can change, so the cost
        is O(n^2) and untouched rows are shared.
        """
        rows = self.rows
        w = exact(w)
        if w >= rows[u][v]:
            return self
        if w + rows[v][u] < 0:
            return None
        row_v = rows[v]
        n = len(rows)
        new_rows = list(rows)
        for i in range(n):
            row_i = rows[i]
            through = row_i[u] + w
            if through >= row_i[v]:
                continue
            new_rows[i] = tuple(
                through + row_v[j] if through + row_v[j] < row_i[j] else row_i[j] for j in range(n)
            )
        for i in range(n):
            if new_rows[i][i] < 0:
                return None
        return DGraph(tuple(new_rows), self.epsilon)

    def add_action(self, duration=(), instantaneous: bool = False) -> DGraph | None:
        """Append start/end points for a new action and its constraints."""
        n = len(self.rows)
        s, e = n, n + 1
        rows = [r + (INF, INF) for r in self.rows]
        rows.append(tuple(INF for _ in range(n)) + (0, INF))
        rows.append(tuple(INF for _ in range(n)) + (INF, 0))
        g: DGraph | None = DGraph(tuple(rows), self.epsilon)
        g = g.tighten(s, 0, -self.epsilon)
        if instantaneous:
            constraints = [("=", 0)]
        else:
            constraints = [(c.op, c.value) for c in duration]
        for op, c in constraints:
            if g is None:
                return None
            c = exact(c)
            if op == "=":
                g = g.tighten(s, e, c)
                g = g and g.tighten(e, s, -c)
            elif op == "<=":
                g = g.tighten(s, e, c)
            elif op == ">=":
                g = g.tighten(e, s, -c)
            else:
                raise ValueError(f"unknown duration operator {op!r}")
        if g is not None:
            g = g.tighten(e, s, 0)  # end never precedes start
        return g

    def add_precedence(self, ti: int, tj: int) -> DGraph | None:
        """Force time point ``ti`` at least epsilon before ``tj``."""
        return self.tighten(tj, ti, -self.epsilon)

    # -- queries ---------------------------------------------------------
    def consistent(self) -> bool:
        return all(self.rows[i][i] >= 0 for i in range(len(self.rows)))

    def schedule(self, steps) -> list[tuple]:
        """Earliest-start schedule: (step, start, duration) per step id."""
        out = []
        for i in steps:
            s, e = 2 * i - 1, 2 * i
            start = -self.rows[s][0]
            out.append((i, exact(start), exact(self.rows[s][0] - self.rows[e][0])))
        return out

    def dump(self) -> str:
        return "\n".join(" ".join(_fmt(x) for x in row) for row in self.rows)

    # -- ordering-store interface -----------------------------------------
    @staticmethod
    def point(ref: tuple) -> int | None:
        step, endpoint = ref
        if step == INIT_ID:
            return 0
        if step == GOAL_ID:
            return None
        return 2 * step - 1 if endpoint == "s" else 2 * step

    def entails_before(self, a: tuple, b: tuple) -> bool:
        pa, pb = self.point(a), self.point(b)
        if pa is None:
            return False
        if pb is None:
            return True
        if pa == pb:
            return False
        return self.rows[pb][pa] <= -self.epsilon

    def possibly_before(self, a: tuple, b: tuple) -> bool:
        pa, pb = self.point(a), self.point(b)
        if pa is None:
            return False
        if pb is None:
            return True
        if pa == pb:
            return False
        return self.rows[pa][pb] >= self.epsilon

    def add_before(self, a: tuple, b: tuple) -> DGraph | None:
        pa, pb = self.point(a), self.point(b)
        if pa is None:
            return None
        if pb is None:
            return self
        if pa == pb:
            return None
        return self.add_precedence(pa, pb)

    def add_step(self, duration=(), instantaneous: bool = False) -> DGraph | None:
        return self.add_action(duration, instantaneous)


def _fmt(x) -> str:
    if x == INF:
        return "inf"
    return str(exact(x))
