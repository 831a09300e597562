"""Generators for the bundled benchmark domains and problems.

Every generator returns ``(domain_text, problem_text)`` in PDDL.
"""

from __future__ import annotations

import random
from pathlib import Path

GRIPPER_DOMAIN = """\
(define (domain gripper)
  (:requirements :strips :typing)
  (:types room ball gripper)
  (:predicates (at-robby ?r - room) (at ?b - ball ?r - room)
               (free ?g - gripper) (carry ?b - ball ?g - gripper))
  (:action move
    :parameters (?from ?to - room)
    :precondition (at-robby ?from)
    :effect (and (at-robby ?to) (not (at-robby ?from))))
  (:action pick
    :parameters (?b - ball ?r - room ?g - gripper)
    :precondition (and (at ?b ?r) (at-robby ?r) (free ?g))
    :effect (and (carry ?b ?g) (not (at ?b ?r)) (not (free ?g))))
  (:action drop
    :parameters (?b - ball ?r - room ?g - gripper)
    :precondition (and (carry ?b ?g) (at-robby ?r))
    :effect (and (at ?b ?r) (free ?g) (not (carry ?b ?g)))))
"""


def gripper(n: int) -> tuple[str, str]:
    balls = " ".join(f"ball{i}" for i in range(1, n + 1))
    init = " ".join(f"(at ball{i} rooma)" for i in range(1, n + 1))
    goal = " ".join(f"(at ball{i} roomb)" for i in range(1, n + 1))
    problem = f"""\
(define (problem gripper-{n})
  (:domain gripper)
  (:objects rooma roomb - room left right - gripper {balls} - ball)
  (:init (at-robby rooma) (free left) (free right) {init})
  (:goal (and {goal})))
"""
    return GRIPPER_DOMAIN, problem


LOGISTICS_DOMAIN = """\
(define (domain logistics)
  (:requirements :strips :typing)
  (:types truck airplane - vehicle package vehicle - physobj
          airport location - place city place physobj - object)
  (:predicates (in-city ?loc - place ?city - city) (at ?obj - physobj ?loc - place)
               (in ?pkg - package ?veh - vehicle))
  (:action load-truck
    :parameters (?pkg - package ?truck - truck ?loc - place)
    :precondition (and (at ?truck ?loc) (at ?pkg ?loc))
    :effect (and (not (at ?pkg ?loc)) (in ?pkg ?truck)))
  (:action load-airplane
    :parameters (?pkg - package ?airplane - airplane ?loc - place)
    :precondition (and (at ?pkg ?loc) (at ?airplane ?loc))
    :effect (and (not (at ?pkg ?loc)) (in ?pkg ?airplane)))
  (:action unload-truck
    :parameters (?pkg - package ?truck - truck ?loc - place)
    :precondition (and (at ?truck ?loc) (in ?pkg ?truck))
    :effect (and (not (in ?pkg ?truck)) (at ?pkg ?loc)))
  (:action unload-airplane
    :parameters (?pkg - package ?airplane - airplane ?loc - place)
    :precondition (and (in ?pkg ?airplane) (at ?airplane ?loc))
    :effect (and (not (in ?pkg ?airplane)) (at ?pkg ?loc)))
  (:action drive-truck
    :parameters (?truck - truck ?loc-from - place ?loc-to - place ?city - city)
    :precondition (and (at ?truck ?loc-from) (in-city ?loc-from ?city) (in-city ?loc-to ?city))
    :effect (and (not (at ?truck ?loc-from)) (at ?truck ?loc-to)))
  (:action fly-airplane
    :parameters (?airplane - airplane ?loc-from - airport ?loc-to - airport)
    :precondition (at ?airplane ?loc-from)
    :effect (and (not (at ?airplane ?loc-from)) (at ?airplane ?loc-to))))
"""


def logistics(packages: int, cities: int = 2, seed: int = 0) -> tuple[str, str]:
    """One truck, one airport and one extra location per city; one airplane."""
    rng = random.Random(seed)
    places = []
    objects = []
    init = []
    for c in range(1, cities + 1):
        city, apt, loc, truck = f"city{c}", f"apt{c}", f"pos{c}", f"truck{c}"
        objects += [f"{city} - city", f"{apt} - airport", f"{loc} - location", f"{truck} - truck"]
        init += [f"(in-city {apt} {city})", f"(in-city {loc} {city})", f"(at {truck} {loc})"]
        places += [apt, loc]
    objects.append("plane1 - airplane")
    init.append("(at plane1 apt1)")
    goal = []
    for p in range(1, packages + 1):
        start, end = rng.sample(places, 2)
        objects.append(f"obj{p} - package")
        init.append(f"(at obj{p} {start})")
        goal.append(f"(at obj{p} {end})")
    problem = f"""\
(define (problem logistics-{packages})
  (:domain logistics)
  (:objects {" ".join(objects)})
  (:init {" ".join(init)})
  (:goal (and {" ".join(goal)})))
"""
    return LOGISTICS_DOMAIN, problem


LINK_CHAIN_DOMAIN = """\
(define (domain link-chain)
  (:requirements :strips :typing)
  (:types node)
  (:predicates (g ?x - node) (i ?x - node) (next ?x ?y - node))
  (:action link
    :parameters (?p ?x - node)
    :precondition (and (next ?p ?x) (g ?p) (i ?x))
    :effect (g ?x))
  (:action shortcut
    :parameters (?x ?y - node)
    :precondition (and (next ?x ?y) (i ?x))
    :effect (and (g ?x) (not (g ?y)) (not (i ?y)))))
"""


def link_chain(n: int) -> tuple[str, str]:
    """Goals g1..gn; each link needs its predecessor, and the cheap shortcut
    for a node destroys its successor."""
    nodes = " ".join(f"n{k}" for k in range(0, n + 2))
    init = ["(g n0)"] + [f"(i n{k})" for k in range(1, n + 2)]
    init += [f"(next n{k} n{k + 1})" for k in range(0, n + 1)]
    goal = " ".join(f"(g n{k})" for k in range(1, n + 1))
    problem = f"""\
(define (problem link-chain-{n})
  (:domain link-chain)
  (:objects {nodes} - node)
  (:init {" ".join(init)})
  (:goal (and {goal})))
"""
    return LINK_CHAIN_DOMAIN, problem


TWO_ACTION_TEMPORAL_DOMAIN = """\
(define (domain two-actions)
  (:requirements :durative-actions)
  (:predicates (p) (g))
  (:durative-action a1
    :parameters ()
    :duration (and (>= ?duration 3) (<= ?duration 7))
    :condition (at end (p))
    :effect (at end (g)))
  (:durative-action a2
    :parameters ()
    :duration (= ?duration 4)
    :condition ()
    :effect (at end (p))))
"""

TWO_ACTION_TEMPORAL_PROBLEM = """\
(define (problem two-actions-1)
  (:domain two-actions)
  (:init)
  (:goal (g)))
"""


def two_action_temporal() -> tuple[str, str]:
    """Two durative actions where the second must end before the first."""
    return TWO_ACTION_TEMPORAL_DOMAIN, TWO_ACTION_TEMPORAL_PROBLEM


SUITES = {
    "gripper": (gripper, (2, 4, 6, 8)),
    "logistics": (logistics, (2, 4, 6)),
    "link-chain": (link_chain, (2, 4, 6, 8)),
}


def write_benchmarks(root: str | Path) -> list[Path]:
    """Write every suite as ``root/<suite>/domain.pddl`` plus problem files."""
    root = Path(root)
    written = []
    for suite, (gen, sizes) in SUITES.items():
        folder = root / suite
        folder.mkdir(parents=True, exist_ok=True)
        for n in sizes:
            domain, problem = gen(n)
            path = folder / f"p{n:02d}.pddl"
            path.write_text(problem)
            written.append(path)
        (folder / "domain.pddl").write_text(domain)
    folder = root / "two-actions"
    folder.mkdir(parents=True, exist_ok=True)
    (folder / "domain.pddl").write_text(TWO_ACTION_TEMPORAL_DOMAIN)
    (folder / "p01.pddl").write_text(TWO_ACTION_TEMPORAL_PROBLEM)
    written.append(folder / "p01.pddl")
    return written
