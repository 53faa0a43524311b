import random

import pytest

from conftest import random_model, rows

from upcohesion.engine import DependencyGraph, evaluate, evaluate_query, plan_body, stratify
from upcohesion.errors import NotStratifiable
from upcohesion.facts import FactBase
from upcohesion.logic import Atom, Constant, Negated, Predicate, Rule, RuleSet, Variable
from upcohesion.metrics import CP, LP, lcom1_rules
from upcohesion.parser import parse_fact_file, parse_rule, parse_rules


def test_stratify_lcom1():
    strata = stratify(lcom1_rules())
    assert len(strata) == 2
    assert strata.stratum_of(CP) == 0
    assert strata.stratum_of(LP) == 1
    assert strata.stratum_of(Predicate("cm", 2)) is None


def test_negative_cycle_is_rejected():
    rules = parse_rules("p(X) :- q(X), not(r(X)).\nr(X) :- q(X), not(p(X)).", [("q", 1)])
    with pytest.raises(NotStratifiable) as info:
        stratify(rules)
    assert set(info.value.predicates) == {Predicate("p", 1), Predicate("r", 1)}


def test_positive_recursion_is_stratifiable():
    rules = parse_rules(
        "path(X, Y) :- edge(X, Y).\npath(X, Z) :- edge(X, Y), path(Y, Z).", [("edge", 2)]
    )
    assert len(stratify(rules)) == 1


def test_dependency_graph_queries():
    rules = parse_rules(
        "a(X) :- b(X).\nb(X) :- a(X), e(X).\nd(X) :- e(X), not(a(X)).", [("e", 1)]
    )
    graph = DependencyGraph(rules)
    a, b, d, e = (Predicate(n, 1) for n in "abde")
    assert graph.recursive(a) and graph.mutually_dependent(a, b)
    assert not graph.recursive(d)
    assert not graph.mutually_dependent(d, a)
    assert graph.dependencies(d) == {a, b, e}
    assert a in graph.negative_dependencies(d)
    assert (d, a, "negative") in graph.edges()
    order = graph.components_bottom_up()
    assert order.index(frozenset({e})) < order.index(frozenset({a, b})) < order.index(frozenset({d}))


def test_lcom1_over_m0(m0):
    result = evaluate(lcom1_rules(), m0.facts)
    assert result.tuples(CP) == rows(
        ("c1", "m1", "m1"), ("c1", "m1", "m2"), ("c1", "m2", "m1"),
        ("c1", "m2", "m2"), ("c1", "m3", "m3"),
    )
    assert result.tuples(LP) == rows(
        ("c1", "m1", "m3"), ("c1", "m3", "m1"), ("c1", "m2", "m3"), ("c1", "m3", "m2"),
    )


def test_old_state_of_the_propagation_example(pqr_program):
    rules, base = pqr_program
    assert evaluate(rules, base).tuples(Predicate("p", 1)) == rows((2,))


def test_transitive_closure():
    rules = parse_rules(
        "path(X, Y) :- edge(X, Y).\npath(X, Z) :- edge(X, Y), path(Y, Z).", [("edge", 2)]
    )
    base = FactBase(parse_fact_file("edge(1, 2). edge(2, 3). edge(3, 1). edge(4, 4)."))
    result = evaluate(rules, base)
    path = result.tuples(Predicate("path", 2))
    assert len(path) == 10
    assert (1, 1) in path and (4, 4) in path and (4, 1) not in path
    assert 3 <= result.rounds[0] <= len(path) + 1


def test_builtins_filter_and_generate():
    rules = parse_rules(
        "pair(X, Y) :- n(X), n(Y), not(X = Y).\n"
        "small(X) :- member(X, [1, 2, 3]), not(big(X)).\n"
        "big(X) :- n(X), X = 3.",
        [("n", 1)],
    )
    base = FactBase(parse_fact_file("n(1). n(3)."))
    result = evaluate(rules, base)
    assert result.tuples(Predicate("pair", 2)) == rows((1, 3), (3, 1))
    assert result.tuples(Predicate("small", 1)) == rows((1,), (2,))


def test_evaluate_query(m0):
    goal = Atom("lp", (Constant("c1"), Constant("m3"), Variable("N")))
    assert evaluate_query(lcom1_rules(), m0.facts, goal) == [{"N": "m1"}, {"N": "m2"}]


def test_plan_runs_tests_once_bound():
    rule = parse_rule("p(X) :- not(r(X)), q(X, Y), not(s(Y)).")
    plan = plan_body(rule.body)
    assert [position for position, _ in plan] == [1, 0, 2]
    assert isinstance(plan[1][1], Negated)
    assert [position for position, _ in plan_body(rule.body, {"X"})] == [0, 1, 2]


GRAPH_RULES = """
path(X, Y) :- edge(X, Y).
path(X, Z) :- edge(X, Y), path(Y, Z).
cut(X, Y) :- node(X), node(Y), not(path(X, Y)), not(X = Y).
small(X) :- member(X, [1, 2, 3]), node(X), not(X = 3).
looped :- edge(X, X).
acyclic :- not(looped).
"""

PARITY_RULES = """
even(X) :- zero(X).
even(Y) :- odd(X), succ(X, Y).
odd(Y) :- even(X), succ(X, Y).
"""


def graph_base(rng):
    base = FactBase()
    for node in range(1, 6):
        if rng.random() < 0.8:
            base.add_row(Predicate("node", 1), (node,))
        for other in range(1, 6):
            if rng.random() < 0.25:
                base.add_row(Predicate("edge", 2), (node, other))
    return base


def parity_base(rng):
    base = FactBase()
    base.add_row(Predicate("zero", 1), (0,))
    for number in range(rng.randint(0, 8)):
        base.add_row(Predicate("succ", 2), (number, number + 1))
    if rng.random() < 0.5:
        base.add_row(Predicate("succ", 2), (rng.randint(0, 8), rng.randint(0, 8)))
    return base


PROGRAMS = [
    (lcom1_rules(), lambda rng: random_model(rng, 4, 4, 4).facts),
    (parse_rules(GRAPH_RULES, [("edge", 2), ("node", 1)]), graph_base),
    (parse_rules(PARITY_RULES, [("zero", 1), ("succ", 2)]), parity_base),
]


def shuffled_bodies(rules, rng):
    return RuleSet(
        [Rule(r.head, tuple(rng.sample(r.body, len(r.body)))) for r in rules],
        rules.extensional,
    )


@pytest.mark.parametrize("rules, make_base", PROGRAMS)
def test_body_order_does_not_change_the_result(rules, make_base):
    rng = random.Random(13)
    for _ in range(20):
        base = make_base(rng)
        expected = evaluate(rules, base)
        permuted = shuffled_bodies(rules, rng)
        actual = evaluate(permuted, base)
        for predicate in rules.intensional:
            assert actual.tuples(predicate) == expected.tuples(predicate), str(predicate)


@pytest.mark.parametrize("rules, make_base", PROGRAMS)
def test_rounds_are_bounded_by_derived_facts(rules, make_base):
    rng = random.Random(17)
    strata = stratify(rules)
    for _ in range(20):
        result = evaluate(rules, make_base(rng), strata)
        for number, stratum in enumerate(strata):
            derived = sum(len(result.tuples(p)) for p in stratum)
            assert 1 <= result.rounds[number] <= derived + 1
