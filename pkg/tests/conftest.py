from __future__ import annotations

import pytest

from pocl import benchmarks
from pocl.search import prepare

# A three-action toy: "make" needs nothing, "use" needs q, "both" needs r and
# produces q too.
TOY_DOMAIN = """\
(define (domain toy)
  (:requirements :strips)
  (:predicates (q) (r) (g) (h))
  (:action make :parameters () :precondition (and) :effect (q))
  (:action use :parameters () :precondition (q) :effect (and (g) (not (r))))
  (:action both :parameters () :precondition (r) :effect (and (q) (h))))
"""

TOY_PROBLEM = """\
(define (problem toy-1) (:domain toy)
  (:init (r))
  (:goal (and (g) (h))))
"""


@pytest.fixture(scope="session")
def toy_ctx():
    return prepare(TOY_DOMAIN, TOY_PROBLEM)


@pytest.fixture(scope="session")
def gripper2_ctx():
    return prepare(*benchmarks.gripper(2))


@pytest.fixture(scope="session")
def two_action_ctx():
    return prepare(*benchmarks.two_action_temporal())
