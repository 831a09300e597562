from __future__ import annotations

import random

from pocl.ordering import GOAL_ID, INIT_ID, BitOrdering


def dfs_reachable(n, edges, src, dst) -> bool:
    adj = {i: [] for i in range(1, n + 1)}
    for u, v in edges:
        adj[u].append(v)
    stack, seen = list(adj[src]), set()
    while stack:
        x = stack.pop()
        if x == dst:
            return True
        if x not in seen:
            seen.add(x)
            stack.extend(adj[x])
    return False


def test_closure_matches_dfs_on_random_dags():
    rng = random.Random(7)
    for _ in range(1000):
        n = rng.randint(1, 12)
        order = BitOrdering()
        for _ in range(n):
            order = order.add_step()
        perm = list(range(1, n + 1))
        rng.shuffle(perm)
        edges = []
        for _ in range(rng.randint(0, 2 * n)):
            a, b = sorted(rng.sample(range(n), 2)) if n > 1 else (0, 0)
            if a == b:
                continue
            u, v = perm[a], perm[b]
            order = order.add_edge(u, v)
            edges.append((u, v))
        for i in range(1, n + 1):
            for j in range(1, n + 1):
                assert order.before(i, j) == dfs_reachable(n, edges, i, j)
        # a back edge along any existing path must be refused
        for u, v in edges[:3]:
            assert order.add_edge(v, u) is None


def test_dummy_steps_frame_everything():
    o = BitOrdering().add_step().add_step()
    assert o.entails_before((INIT_ID, "e"), (1, "s"))
    assert o.entails_before((2, "e"), (GOAL_ID, "s"))
    assert o.add_before((GOAL_ID, "e"), (1, "s")) is None
    assert o.add_before((1, "e"), (INIT_ID, "s")) is None
    assert o.possibly_before((1, "e"), (2, "s")) and o.possibly_before((2, "e"), (1, "s"))


def test_topological_order_and_chain():
    o = BitOrdering()
    for _ in range(4):
        o = o.add_step()
    o = o.add_edge(3, 1).add_edge(1, 2)
    assert o.topological_order() == [3, 1, 2, 4]
    assert o.longest_chain() == 3
    parent = o
    child = o.add_edge(4, 3)
    assert not parent.before(4, 3) and child.before(4, 2)
