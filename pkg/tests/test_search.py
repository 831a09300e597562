from __future__ import annotations

import math

import pytest

from pocl import benchmarks
from pocl.flaws import parse_strategy, select_flaw
from pocl.heuristics import INF, rank_plan
from pocl.plans import make_initial_plan, refinements
from pocl.search import (
    AStar,
    BudgetExhausted,
    Failure,
    ScheduleEntry,
    Solution,
    astar,
    cumulative_allowance,
    default_schedule,
    prepare,
    round_increment,
    round_robin,
    solve,
)


def reference_search(ctx, strategy, ranking, use_effort=True):
    """List-based best-first search: pop the minimum key by linear scan."""
    frontier = []
    serial = 0
    generated = 0
    trace = []

    def push(plan):
        nonlocal serial, generated
        f, effort = rank_plan(plan, ctx.table, ranking)
        if f == INF:
            return
        plan.serial = serial
        frontier.append(((f, effort if use_effort else 0, -plan.num_steps, serial), plan))
        serial += 1
        generated += 1

    push(make_initial_plan(ctx))
    while frontier:
        best = min(range(len(frontier)), key=lambda i: frontier[i][0])
        _, plan = frontier.pop(best)
        if plan.is_complete():
            return plan, generated, trace
        flaw = select_flaw(plan, strategy, ctx.table)
        trace.append(str(flaw))
        for kid in refinements(plan, flaw):
            push(kid)
    return None, generated, trace


@pytest.mark.parametrize("ranking", ["add", "add-r", "oc"])
@pytest.mark.parametrize("use_effort", [True, False])
def test_pop_order_matches_reference(gripper2_ctx, ranking, use_effort):
    strategy = parse_strategy("LCFR")
    trace = []
    out = AStar(gripper2_ctx, strategy, ranking, use_effort=use_effort, trace=trace).run(20000)
    plan, generated, ref_trace = reference_search(gripper2_ctx, strategy, ranking, use_effort)
    assert isinstance(out, Solution)
    assert out.generated == generated
    assert [str(f) for f in trace] == ref_trace
    assert out.plan.num_steps == plan.num_steps


def test_resumption_is_invisible(gripper2_ctx):
    strategy = parse_strategy("MW-Loc")
    whole = AStar(gripper2_ctx, strategy).run()
    pieces = AStar(gripper2_ctx, strategy)
    limit = 0
    while True:
        limit += 7
        out = pieces.run(limit)
        if not isinstance(out, BudgetExhausted):
            break
        assert out.generated == limit
    assert isinstance(out, Solution)
    assert (out.generated, out.explored) == (whole.generated, whole.explored)
    assert pieces.run(limit + 100) is out  # finished searches stay finished


def test_trivial_goal_is_solved_immediately():
    ctx = prepare(*benchmarks.gripper(1)[:1], benchmarks.gripper(1)[1].replace("(:goal (and (at ball1 roomb)))", "(:goal (and))"))
    out = astar(ctx, "UCPOP")
    assert isinstance(out, Solution)
    assert out.plan.num_steps == 0 and out.generated == 1


def test_goal_already_true(toy_ctx):
    ctx = prepare(
        "(define (domain d) (:predicates (p)) (:action a :parameters () :precondition (and) :effect (p)))",
        "(define (problem x) (:domain d) (:init (p)) (:goal (p)))",
    )
    out = astar(ctx, "UCPOP")
    assert isinstance(out, Solution) and out.plan.num_steps == 0


def test_unreachable_goal_fails_without_generating():
    ctx = prepare(
        "(define (domain d) (:predicates (p) (z)) (:action a :parameters () :precondition (z) :effect (p)))",
        "(define (problem x) (:domain d) (:init) (:goal (p)))",
    )
    out = astar(ctx, "UCPOP")
    assert isinstance(out, Failure) and out.generated == 0


def test_exhausted_space_fails():
    # the only achiever destroys what the goal also needs
    ctx = prepare(
        """(define (domain d) (:predicates (p) (q))
           (:action a :parameters () :precondition (q) :effect (and (p) (not (q)))))""",
        "(define (problem x) (:domain d) (:init (q)) (:goal (and (p) (q))))",
    )
    assert isinstance(astar(ctx, "UCPOP", "oc"), Failure)


def test_round_increments():
    assert [round_increment(i) for i in range(1, 11)] == [1000, 1000, 2000, 4000, 8000, 16000, 32000, 64000, 128000, 256000]
    for i in range(1, 11):
        assert cumulative_allowance(i) == sum(round_increment(k) for k in range(1, i + 1)) == 1000 * 2 ** (i - 1)


class CountingStub:
    """Generates nodes one at a time; succeeds at a fixed cumulative count."""

    def __init__(self, succeed_at=math.inf):
        self.generated = 0
        self.succeed_at = succeed_at

    def run(self, limit):
        while self.generated < limit:
            self.generated += 1
            if self.generated == self.succeed_at:
                return Solution(None, self.generated, 0)
        return BudgetExhausted(self.generated, 0)


def ipc_round_robin_example():
    caps = (10000, 100000, 200000, math.inf)
    names = ("MW-Loc", "MW-Loc-Conf", "LCFR-Loc", "LCFR-Loc-Conf")
    stubs = [CountingStub(107375 if k == 2 else math.inf) for k in range(4)]
    entries = [ScheduleEntry(n, s, c) for n, s, c in zip(names, stubs, caps)]
    return round_robin(entries)


def test_ipc_round_robin_example_round_robin():
    result = ipc_round_robin_example()
    assert result.winner == "LCFR-Loc"
    assert result.round_totals() == [4000, 4000, 8000, 16000, 26000, 48000, 96000, 79375]
    assert result.per_strategy("MW-Loc") == [1000, 1000, 2000, 4000, 2000]
    assert result.per_strategy("MW-Loc-Conf") == [1000, 1000, 2000, 4000, 8000, 16000, 32000, 36000]
    assert result.per_strategy("LCFR-Loc") == [1000, 1000, 2000, 4000, 8000, 16000, 32000, 43375]
    assert result.per_strategy("LCFR-Loc-Conf") == [1000, 1000, 2000, 4000, 8000, 16000, 32000]
    assert result.generated == 281375


def test_single_strategy_schedule_runs_to_completion():
    stub = CountingStub(5000)
    result = round_robin([ScheduleEntry("only", stub)])
    assert isinstance(result.outcome, Solution)
    assert result.per_strategy("only") == [1000, 1000, 2000, 1000]


def test_all_capped_strategies_give_up():
    result = round_robin([ScheduleEntry("a", CountingStub(), 1500), ScheduleEntry("b", CountingStub(), 3000)])
    assert isinstance(result.outcome, BudgetExhausted)
    assert result.per_strategy("a") == [1000, 500]
    assert result.per_strategy("b") == [1000, 1000, 1000]


def test_exhausted_queues_report_failure():
    ctx = prepare(
        """(define (domain d) (:predicates (p) (q))
           (:action a :parameters () :precondition (q) :effect (and (p) (not (q)))))""",
        "(define (problem x) (:domain d) (:init (q)) (:goal (and (p) (q))))",
    )
    assert isinstance(solve(ctx, ranking="oc").outcome, Failure)


def test_default_schedule():
    assert default_schedule(False)[0] == ("MW-Loc", 10000)
    assert default_schedule(True)[2] == ("LCFR-Loc", 240000)
    assert default_schedule(False)[3][1] == math.inf


def test_solve_returns_valid_solution(gripper2_ctx, two_action_ctx):
    for ctx in (gripper2_ctx, two_action_ctx):
        result = solve(ctx)
        assert isinstance(result.outcome, Solution)
        assert result.winner == "MW-Loc"


def test_parallel_portfolio(gripper2_ctx):
    result = solve(gripper2_ctx, parallel=True)
    assert isinstance(result.outcome, Solution)


def test_node_limit_gives_budget_outcome():
    ctx = prepare(*benchmarks.gripper(4))
    result = solve(ctx, [("UCPOP", math.inf)], "oc", node_limit=50)
    assert isinstance(result.outcome, BudgetExhausted)
    assert result.generated <= 50
