"""Command-line front end."""

from __future__ import annotations

import argparse
import csv
import math
import sys
import time
from fractions import Fraction
from pathlib import Path

from .flaws import StrategyError, parse_strategy
from .heuristics import RANKINGS
from .pddl import PDDLError, parse_domain, parse_problem
from .plans import Plan, schedule
from .search import BudgetExhausted, Solution, default_schedule, prepare, solve
from .stn import DGraph, exact
from .validate import validate

EXIT_SOLVED, EXIT_UNSOLVED, EXIT_INPUT = 0, 1, 2


def format_plan(plan: Plan) -> str:
    """Classical: ``index: (name args)``; durative: ``start: (name args) [duration]``."""
    lines = []
    for _, name, args, start, duration in schedule(plan):
        action = "(" + " ".join((name,) + tuple(args)) + ")"
        if duration is None:
            lines.append(f"{start}: {action}")
        else:
            lines.append(f"{exact(start)}: {action} [{exact(duration)}]")
    return "\n".join(lines) + ("\n" if lines else "")


def makespan(plan: Plan):
    """Durative: latest end time; classical: longest precedence chain."""
    if isinstance(plan.orderings, DGraph):
        return max((exact(s + d) for *_, s, d in schedule(plan)), default=0)
    return plan.orderings.longest_chain()


def parse_schedule_item(text: str) -> tuple[str, float]:
    """``name[:cap]`` or raw strategy notation."""
    head, sep, tail = text.rpartition(":")
    if sep and (tail.strip().isdigit() or tail.strip().lower() in ("inf", "∞")):
        cap = math.inf if not tail.strip().isdigit() else int(tail)
        if cap != math.inf and cap <= 0:
            raise StrategyError(f"cap must be positive in {text!r}")
        return head.strip(), cap
    return text.strip(), math.inf


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pocl", description="Partial-order causal-link planner.")
    p.add_argument("--domain", help="PDDL domain file")
    p.add_argument("--problem", help="PDDL problem file")
    p.add_argument("--strategy", action="append", default=[], help='flaw selection strategy, "name[:cap]" or notation; repeatable')
    p.add_argument("--heuristic", choices=RANKINGS, default="add-r", help="plan ranking")
    p.add_argument("--epsilon", default="1", help="minimal separation between ordered time points")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--lifted", action="store_true", help="plan with lifted actions and variable bindings")
    p.add_argument("--limit-nodes", type=int, help="per-strategy cap on generated plans")
    p.add_argument("--limit-mem", type=float, help="memory limit in MB")
    p.add_argument("--time-limit", type=float, help="wall-clock limit in seconds")
    p.add_argument("--round-base", type=int, default=1000, help="node allowance of the first round")
    p.add_argument("--verbose", action="store_true", help="progress and statistics on stderr")
    p.add_argument("--dump-table", action="store_true", help="print the heuristic table and exit")
    p.add_argument("--validate", metavar="FILE", help="validate a plan file instead of planning")
    p.add_argument("--bench", metavar="DIR", help="solve every problem in DIR and print CSV")
    return p


def _epsilon(text: str) -> Fraction:
    eps = Fraction(text)
    if eps <= 0:
        raise ValueError("epsilon must be positive")
    return eps


def run(args, out=None, err=None) -> int:
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    try:
        eps = _epsilon(args.epsilon)
        if args.bench:
            return bench(args, Path(args.bench), eps, out, err)
        if not args.domain or not args.problem:
            print("error: --domain and --problem are required", file=err)
            return EXIT_INPUT
        domain_text = Path(args.domain).read_text()
        problem_text = Path(args.problem).read_text()
        if args.validate:
            domain = parse_domain(domain_text)
            problem = parse_problem(problem_text, domain)
            verdict = validate(domain, problem, Path(args.validate).read_text(), eps)
            print(("valid: " if verdict else "invalid: ") + verdict.message, file=out)
            return EXIT_SOLVED if verdict else EXIT_UNSOLVED
        ctx = prepare(domain_text, problem_text, lifted=args.lifted, epsilon=eps)
        if args.dump_table:
            for line in ctx.table.dump_lines():
                print(line, file=out)
            return EXIT_SOLVED
        plan_schedule = _schedule(args, ctx)
    except (OSError, PDDLError, StrategyError, ValueError) as exc:
        print(f"error: {exc}", file=err)
        return EXIT_INPUT
    result = _solve(args, ctx, plan_schedule, err)
    outcome = result.outcome
    if isinstance(outcome, Solution):
        out.write(format_plan(outcome.plan))
        if args.verbose:
            print(
                f"solved by {result.winner}: steps {outcome.plan.num_steps} makespan {makespan(outcome.plan)} "
                f"generated {result.generated} explored {result.explored}",
                file=err,
            )
        return EXIT_SOLVED
    reason = "limits reached" if isinstance(outcome, BudgetExhausted) else "no plan exists"
    print(f"no solution: {reason}", file=err)
    return EXIT_UNSOLVED


def _schedule(args, ctx):
    if not args.strategy:
        items = default_schedule(ctx.durative)
    else:
        items = [parse_schedule_item(s) for s in args.strategy]
    return [(parse_strategy(spec, lifted=ctx.lifted), cap) for spec, cap in items]


def _solve(args, ctx, plan_schedule, err):
    deadline = None if args.time_limit is None else time.monotonic() + args.time_limit
    return solve(
        ctx,
        plan_schedule,
        args.heuristic,
        base=args.round_base,
        seed=args.seed,
        node_limit=args.limit_nodes,
        deadline=deadline,
        mem_limit_mb=args.limit_mem,
        verbose=err if args.verbose else None,
    )


BENCH_FIELDS = ("problem", "outcome", "steps", "makespan", "generated", "explored", "wall_time")


def _bench_problems(root: Path, domain: Path | None):
    if domain is not None:
        for f in sorted(root.glob("*.pddl")):
            if f.resolve() != domain.resolve():
                yield domain, f
        return
    for folder in sorted({p.parent for p in root.rglob("domain.pddl")}):
        for f in sorted(folder.glob("*.pddl")):
            if f.name != "domain.pddl":
                yield folder / "domain.pddl", f


def bench(args, root: Path, eps, out, err) -> int:
    if not root.is_dir():
        print(f"error: {root} is not a directory", file=err)
        return EXIT_INPUT
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(BENCH_FIELDS)
    domain = Path(args.domain) if args.domain else None
    for domain_path, problem_path in _bench_problems(root, domain):
        name = str(problem_path.relative_to(root))
        started = time.perf_counter()
        try:
            ctx = prepare(domain_path.read_text(), problem_path.read_text(), lifted=args.lifted, epsilon=eps)
            result = _solve(args, ctx, _schedule(args, ctx), err)
        except (OSError, PDDLError, StrategyError, ValueError) as exc:
            print(f"error: {problem_path}: {exc}", file=err)
            writer.writerow((name, "error", "", "", "", "", f"{time.perf_counter() - started:.3f}"))
            continue
        outcome = result.outcome
        wall = f"{time.perf_counter() - started:.3f}"
        if isinstance(outcome, Solution):
            plan = outcome.plan
            span = makespan(plan) if ctx.durative else ""
            writer.writerow((name, "solved", plan.num_steps, span, result.generated, result.explored, wall))
        else:
            kind = "limit" if isinstance(outcome, BudgetExhausted) else "failure"
            writer.writerow((name, kind, "", "", result.generated, result.explored, wall))
    return EXIT_SOLVED


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return run(args)


if __name__ == "__main__":
    sys.exit(main())
