"""A* over partial plans and the round-robin strategy scheduler."""

from __future__ import annotations

import heapq
import itertools
import math
import resource
import threading
import time
from collections import deque
from dataclasses import dataclass, field

from .flaws import FlawStrategy, parse_strategy, select_flaw
from .grounding import ground_problem
from .heuristics import RANKINGS, build_table, rank_plan
from .pddl import parse_domain, parse_problem
from .plans import Plan, PlanningContext, make_initial_plan, refinements

INF = math.inf


@dataclass
class Solution:
    plan: Plan
    generated: int
    explored: int


@dataclass
class Failure:
    generated: int
    explored: int


@dataclass
class BudgetExhausted:
    generated: int
    explored: int
    reason: str = "nodes"


def prepare(domain_text: str, problem_text: str, *, lifted: bool = False, epsilon=1) -> PlanningContext:
    """Parse, ground and build the heuristic table."""
    domain = parse_domain(domain_text)
    problem = parse_problem(problem_text, domain)
    gp = ground_problem(domain, problem)
    table = build_table(gp.actions, gp.init, durative=gp.durative, objects=gp.objects)
    return PlanningContext(gp, table, lifted=lifted, epsilon=epsilon)


def _rss_mb() -> float:
    return resource.getrusage(resource.RUSAGE_SELF).ru_maxrss / 1024


class AStar:
    """Resumable best-first search with one flaw selection strategy.

    Queue entries are keyed by ``(f, effort, -g, insertion order)``.  Plans
    ranked infinite are dropped before insertion and are not counted.  The
    node budget is checked at the generation counter, so a run can stop in
    the middle of a node's successors; those wait in ``pending`` until the
    search is resumed.
    """

    def __init__(
        self,
        ctx: PlanningContext,
        strategy: FlawStrategy,
        ranking: str = "add-r",
        *,
        seed: int = 0,
        use_effort: bool = True,
        deadline: float | None = None,
        mem_limit_mb: float | None = None,
        trace: list | None = None,
    ):
        if ranking not in RANKINGS:
            raise ValueError(f"unknown ranking {ranking!r}")
        self.ctx = ctx
        self.strategy = strategy
        self.ranking = ranking
        self.seed = seed
        self.use_effort = use_effort
        self.deadline = deadline
        self.mem_limit_mb = mem_limit_mb
        self.trace = trace  # selected flaws, appended in selection order
        self.generated = 0
        self.explored = 0
        self.queue: list = []
        self.pending: deque = deque()
        self._serial = itertools.count()
        self.pending.append(make_initial_plan(ctx))
        self.done = None

    def key(self, plan: Plan) -> tuple:
        f, effort = plan.rank
        return (f, effort if self.use_effort else 0, -plan.num_steps, plan.serial)

    def run(self, limit: float = INF):
        """Search until a solution, an empty queue, or ``generated == limit``."""
        if self.done is not None:
            return self.done
        checks = 0
        while True:
            if self.pending:
                plan = self.pending[0]
                if plan.rank is None:
                    plan.rank = rank_plan(plan, self.ctx.table, self.ranking)
                if plan.rank[0] == INF:
                    self.pending.popleft()
                    continue
                if self.generated >= limit:
                    return BudgetExhausted(self.generated, self.explored)
                self.pending.popleft()
                plan.serial = next(self._serial)
                heapq.heappush(self.queue, (self.key(plan), plan))
                self.generated += 1
                continue
            if not self.queue:
                self.done = Failure(self.generated, self.explored)
                return self.done
            checks += 1
            if checks % 64 == 0:
                if self.deadline is not None and time.monotonic() > self.deadline:
                    return BudgetExhausted(self.generated, self.explored, "time")
                if self.mem_limit_mb is not None and _rss_mb() > self.mem_limit_mb:
                    return BudgetExhausted(self.generated, self.explored, "memory")
            _, plan = heapq.heappop(self.queue)
            self.explored += 1
            if plan.is_complete():
                self.done = Solution(plan, self.generated, self.explored)
                return self.done
            flaw = select_flaw(plan, self.strategy, self.ctx.table, self.seed)
            if self.trace is not None:
                self.trace.append(flaw)
            self.pending.extend(refinements(plan, flaw))


def astar(ctx: PlanningContext, strategy, ranking: str = "add-r", limit: float = INF, **kw):
    if isinstance(strategy, str):
        strategy = parse_strategy(strategy, lifted=ctx.lifted)
    return AStar(ctx, strategy, ranking, **kw).run(limit)


# ---------------------------------------------------------------------------
# round robin


def round_increment(r: int, base: int = 1000) -> int:
    """Extra nodes granted in round ``r`` (1-based)."""
    return base if r <= 2 else base * 2 ** (r - 2)


def cumulative_allowance(r: int, base: int = 1000) -> int:
    return base * 2 ** (r - 1)


@dataclass
class ScheduleEntry:
    name: str
    solver: object  # anything with run(limit) and a ``generated`` counter
    cap: float = INF


@dataclass
class RoundRobinResult:
    outcome: object
    winner: str | None
    log: list = field(default_factory=list)  # (round, name, nodes generated in round)
    rounds: int = 0
    generated: int = 0  # summed over every strategy
    explored: int = 0

    def finish(self, entries) -> RoundRobinResult:
        self.generated = sum(e.solver.generated for e in entries)
        self.explored = sum(getattr(e.solver, "explored", 0) for e in entries)
        return self

    def round_totals(self) -> list[int]:
        totals: dict[int, int] = {}
        for r, _, n in self.log:
            totals[r] = totals.get(r, 0) + n
        return [totals[r] for r in sorted(totals)]

    def per_strategy(self, name: str) -> list[int]:
        return [n for _, s, n in self.log if s == name]


def round_robin(entries: list[ScheduleEntry], base: int = 1000, *, max_rounds: int | None = None, verbose=None) -> RoundRobinResult:
    """Interleave strategies with geometrically growing node allowances.

    In round ``r`` each strategy still active runs until its cumulative
    generated count reaches ``min(base * 2**(r-1), cap)``.  A strategy retires
    when it reaches its cap or its queue empties.  The first solution wins;
    without one the outcome is a budget exhaustion if any cap was hit.
    """
    active = list(entries)
    result = RoundRobinResult(None, None)
    r = 0
    capped = False
    while active:
        r += 1
        if max_rounds is not None and r > max_rounds:
            break
        allowance = cumulative_allowance(r, base)
        for entry in list(active):
            solver = entry.solver
            limit = min(allowance, entry.cap)
            before = solver.generated
            outcome = solver.run(limit)
            result.log.append((r, entry.name, solver.generated - before))
            if verbose is not None:
                explored = getattr(solver, "explored", "-")
                print(f"[{entry.name}] round {r}: generated {solver.generated} explored {explored}", file=verbose)
            if isinstance(outcome, Solution):
                result.outcome, result.winner, result.rounds = outcome, entry.name, r
                return result.finish(entries)
            if isinstance(outcome, BudgetExhausted) and outcome.reason != "nodes":
                result.outcome, result.rounds = outcome, r
                return result.finish(entries)
            if isinstance(outcome, Failure):
                active.remove(entry)
            elif solver.generated >= entry.cap:
                active.remove(entry)
                capped = True
    result.rounds = r
    total = sum(e.solver.generated for e in entries)
    if capped or active:
        # some search space was left unexplored
        result.outcome = BudgetExhausted(total, 0)
    else:
        result.outcome = Failure(total, 0)
    return result.finish(entries)


def parallel_portfolio(entries: list[ScheduleEntry], chunk: int = 500, deadline: float | None = None) -> RoundRobinResult:
    """One thread per strategy; the first solution cancels the others.

    Only the outcome is meaningful; node counts depend on thread timing.
    """
    stop = threading.Event()
    lock = threading.Lock()
    result = RoundRobinResult(None, None)
    failures: list = []

    def work(entry: ScheduleEntry) -> None:
        solver = entry.solver
        while not stop.is_set():
            if deadline is not None and time.monotonic() > deadline:
                return
            limit = min(solver.generated + chunk, entry.cap)
            outcome = solver.run(limit)
            if isinstance(outcome, Solution):
                with lock:
                    if result.outcome is None:
                        result.outcome, result.winner = outcome, entry.name
                stop.set()
                return
            if isinstance(outcome, Failure):
                with lock:
                    failures.append(entry.name)
                return
            if solver.generated >= entry.cap:
                return
            if isinstance(outcome, BudgetExhausted) and outcome.reason != "nodes":
                return

    threads = [threading.Thread(target=work, args=(e,), daemon=True) for e in entries]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    if result.outcome is None:
        total = sum(e.solver.generated for e in entries)
        timed_out = len(failures) < len(entries)
        result.outcome = BudgetExhausted(total, 0, "time") if timed_out else Failure(total, 0)
    return result.finish(entries)


# ---------------------------------------------------------------------------
# defaults and facade

IPC_ORDER = ("MW-Loc", "MW-Loc-Conf", "LCFR-Loc", "LCFR-Loc-Conf")
STRIPS_CAPS = (10000, 100000, 200000, INF)
DURATIVE_CAPS = (12000, 100000, 240000, INF)


def default_schedule(durative: bool) -> list[tuple[str, float]]:
    return list(zip(IPC_ORDER, DURATIVE_CAPS if durative else STRIPS_CAPS))


def solve(
    ctx: PlanningContext,
    schedule: list[tuple[str, float]] | None = None,
    ranking: str = "add-r",
    *,
    base: int = 1000,
    seed: int = 0,
    node_limit: float | None = None,
    deadline: float | None = None,
    mem_limit_mb: float | None = None,
    parallel: bool = False,
    verbose=None,
) -> RoundRobinResult:
    """Run a strategy schedule on a prepared problem."""
    if schedule is None:
        schedule = default_schedule(ctx.durative)
    entries = []
    for spec, cap in schedule:
        strategy = spec if isinstance(spec, FlawStrategy) else parse_strategy(spec, lifted=ctx.lifted)
        solver = AStar(ctx, strategy, ranking, seed=seed, deadline=deadline, mem_limit_mb=mem_limit_mb)
        if node_limit is not None:
            cap = min(cap, node_limit)
        entries.append(ScheduleEntry(strategy.name, solver, cap))
    if parallel:
        return parallel_portfolio(entries, deadline=deadline)
    return round_robin(entries, base, verbose=verbose)
