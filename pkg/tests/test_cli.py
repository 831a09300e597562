from __future__ import annotations

import csv
import io
from pathlib import Path

import pytest

from pocl import benchmarks
from pocl.cli import EXIT_INPUT, EXIT_SOLVED, EXIT_UNSOLVED, build_parser, format_plan, main, parse_schedule_item, run
from pocl.pddl import parse_domain, parse_problem
from pocl.search import Solution, astar, prepare
from pocl.validate import parse_plan, validate


def write(tmp_path: Path, domain: str, problem: str) -> tuple[str, str]:
    d, p = tmp_path / "domain.pddl", tmp_path / "problem.pddl"
    d.write_text(domain)
    p.write_text(problem)
    return str(d), str(p)


def invoke(*argv) -> tuple[int, str, str]:
    out, err = io.StringIO(), io.StringIO()
    code = run(build_parser().parse_args(list(argv)), out, err)
    return code, out.getvalue(), err.getvalue()


def test_two_action_output(tmp_path):
    d, p = write(tmp_path, *benchmarks.two_action_temporal())
    code, out, _ = invoke("--domain", d, "--problem", p)
    assert code == EXIT_SOLVED
    assert out.splitlines() == ["1: (a1) [5]", "1: (a2) [4]"]


def test_classical_output_is_indexed_topological(tmp_path):
    d, p = write(tmp_path, *benchmarks.gripper(1))
    code, out, _ = invoke("--domain", d, "--problem", p)
    assert code == EXIT_SOLVED
    lines = out.splitlines()
    assert [line.split(":")[0] for line in lines] == [str(i) for i in range(len(lines))]
    assert lines[0].startswith("0: (pick ball1 rooma")


def test_trivial_problem_prints_empty_plan(tmp_path):
    dtext, _ = benchmarks.gripper(1)
    d, p = write(tmp_path, dtext, "(define (problem t) (:domain gripper) (:objects) (:init) (:goal (and)))")
    code, out, _ = invoke("--domain", d, "--problem", p)
    assert code == EXIT_SOLVED and out == ""


def test_missing_file_is_input_error(tmp_path):
    code, _, err = invoke("--domain", str(tmp_path / "nope.pddl"), "--problem", str(tmp_path / "nope2.pddl"))
    assert code == EXIT_INPUT and "error" in err


def test_parse_error_is_input_error(tmp_path):
    d, p = write(tmp_path, "(define (domain x)", "(define (problem y))")
    code, _, err = invoke("--domain", d, "--problem", p)
    assert code == EXIT_INPUT and "line" in err


@pytest.mark.parametrize("argv", [["--epsilon", "0"], ["--strategy", "{o}LIFO"], ["--strategy", "UCPOP:0"]])
def test_bad_flags_are_input_errors(tmp_path, argv):
    d, p = write(tmp_path, *benchmarks.gripper(1))
    assert invoke("--domain", d, "--problem", p, *argv)[0] == EXIT_INPUT


def test_unsolvable_exit_code(tmp_path):
    d, p = write(
        tmp_path,
        "(define (domain d) (:predicates (p) (z)) (:action a :parameters () :precondition (z) :effect (p)))",
        "(define (problem x) (:domain d) (:init) (:goal (p)))",
    )
    code, _, err = invoke("--domain", d, "--problem", p)
    assert code == EXIT_UNSOLVED and "no plan exists" in err


def test_limits_exit_code(tmp_path):
    d, p = write(tmp_path, *benchmarks.gripper(5))
    code, _, err = invoke("--domain", d, "--problem", p, "--strategy", "UCPOP", "--heuristic", "oc", "--limit-nodes", "30")
    assert code == EXIT_UNSOLVED and "limits" in err


def test_schedule_items():
    assert parse_schedule_item("MW-Loc:10000") == ("MW-Loc", 10000)
    assert parse_schedule_item("{n,s}LR / {l}MW_add") == ("{n,s}LR / {l}MW_add", float("inf"))
    assert parse_schedule_item("LCFR:inf")[1] == float("inf")


def test_output_is_deterministic(tmp_path):
    d, p = write(tmp_path, *benchmarks.logistics(2))
    runs = {invoke("--domain", d, "--problem", p, "--seed", "5", "--strategy", "{n,s}LIFO / {o}R")[1] for _ in range(3)}
    assert len(runs) == 1


def test_lifted_mode_solves_and_validates(tmp_path):
    d, p = write(tmp_path, *benchmarks.gripper(2))
    code, out, _ = invoke("--domain", d, "--problem", p, "--lifted")
    assert code == EXIT_SOLVED
    plan_file = tmp_path / "plan.txt"
    plan_file.write_text(out)
    code, verdict, _ = invoke("--domain", d, "--problem", p, "--validate", str(plan_file))
    assert code == EXIT_SOLVED and verdict.startswith("valid")


def test_dump_table(tmp_path):
    d, p = write(tmp_path, *benchmarks.two_action_temporal())
    code, out, _ = invoke("--domain", d, "--problem", p, "--dump-table")
    assert code == EXIT_SOLVED
    assert "(g) 2 2" in out.splitlines()


def test_bench_csv(tmp_path):
    benchmarks.write_benchmarks(tmp_path)
    for f in tmp_path.glob("*/p0[4-8].pddl"):
        f.unlink()
    code, out, _ = invoke("--bench", str(tmp_path))
    assert code == EXIT_SOLVED
    rows = list(csv.DictReader(io.StringIO(out)))
    assert [r["problem"] for r in rows] == [
        "gripper/p02.pddl",
        "link-chain/p02.pddl",
        "logistics/p02.pddl",
        "two-actions/p01.pddl",
    ]
    assert all(r["outcome"] == "solved" and int(r["generated"]) > 0 for r in rows)
    assert rows[-1]["makespan"] == "6" and rows[0]["makespan"] == ""


def test_main_entry_point(tmp_path, capsys):
    d, p = write(tmp_path, *benchmarks.two_action_temporal())
    assert main(["--domain", d, "--problem", p]) == EXIT_SOLVED
    assert "1: (a1) [5]" in capsys.readouterr().out


# -- validator -----------------------------------------------------------------


def two_action_world():
    dtext, ptext = benchmarks.two_action_temporal()
    d = parse_domain(dtext)
    return d, parse_problem(ptext, d)


def test_validator_accepts_two_action_schedule():
    d, p = two_action_world()
    assert validate(d, p, "1: (a1) [5]\n1: (a2) [4]\n")


def test_validator_rejects_short_duration():
    d, p = two_action_world()
    verdict = validate(d, p, "1: (a1) [2]\n1: (a2) [4]\n")
    assert not verdict and "duration" in verdict.message


def test_validator_rejects_simultaneous_dependency():
    d, p = two_action_world()
    # a2 ends exactly when a1 ends: the condition is not separated by epsilon
    verdict = validate(d, p, "1: (a1) [4]\n1: (a2) [4]\n")
    assert not verdict


def test_validator_rejects_missing_action():
    d, p = two_action_world()
    verdict = validate(d, p, "1: (a2) [4]\n")
    assert not verdict and "(g)" in verdict.message
    dtext, ptext = benchmarks.gripper(1)
    gd = parse_domain(dtext)
    gp = parse_problem(ptext, gd)
    verdict = validate(gd, gp, "0: (pick ball1 rooma left)\n")
    assert not verdict and "goal" in verdict.message


def test_validator_rejects_unmet_precondition():
    dtext, ptext = benchmarks.gripper(1)
    gd = parse_domain(dtext)
    gp = parse_problem(ptext, gd)
    verdict = validate(gd, gp, "0: (drop ball1 roomb left)\n")
    assert not verdict and "drop" in verdict.message


def test_validator_accepts_planner_output():
    for maker in (lambda: benchmarks.gripper(3), lambda: benchmarks.logistics(2), lambda: benchmarks.link_chain(3)):
        dtext, ptext = maker()
        ctx = prepare(dtext, ptext)
        out = astar(ctx, "MW-Loc-Conf")
        assert isinstance(out, Solution)
        d = parse_domain(dtext)
        assert validate(d, parse_problem(ptext, d), format_plan(out.plan))


def test_plan_reader_rejects_garbage():
    with pytest.raises(ValueError, match="line 2"):
        parse_plan("0: (a)\nnonsense\n")
