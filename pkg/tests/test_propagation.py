import random

import pytest

from conftest import random_model, rows

from upcohesion.bench import random_refactoring
from upcohesion.engine import evaluate
from upcohesion.errors import SeedPredicateUnknown
from upcohesion.facts import DeltaSet, FactBase, apply_delta_set, normalize_seeds
from upcohesion.logic import Atom, Constant, Predicate, Variable
from upcohesion.metrics import CP, LP, lcom1_all, remap_incremental
from upcohesion.model import C, CF, CM, MF, CohesionModel
from upcohesion.parser import parse_fact_file, parse_rules
from upcohesion.propagation import check_against_oracle, propagate
from upcohesion.refactoring import seeds_for
from upcohesion.transform import TransformOptions, transform

P = Predicate("p", 1)
R = Predicate("r", 1)


def test_insertion_of_r_induces_p(pqr_program):
    rules, base = pqr_program
    seeds = DeltaSet(additions={R: {(2,)}})
    result = propagate(transform(rules), base, seeds)
    assert result.induced.added(P) == rows((1,))
    assert result.induced.deleted(P) == frozenset()
    assert result.new_state(P) == rows((1,), (2,))


def test_deletion_of_r_removes_p(pqr_program):
    rules, base = pqr_program
    seeds = DeltaSet(deletions={R: {(3,)}})
    result = propagate(transform(rules), base, seeds)
    assert result.induced.deleted(P) == rows((2,))
    assert not check_against_oracle(rules, base, seeds)


def test_empty_seeds_induce_nothing(pqr_program, lcom1_set, m0):
    rules, base = pqr_program
    assert propagate(transform(rules), base, DeltaSet()).induced.is_empty()
    result = propagate(transform(lcom1_set), m0.facts, DeltaSet())
    assert result.induced.is_empty()
    assert result.new_state(LP) == evaluate(lcom1_set, m0.facts).tuples(LP)


def test_move_method_out_of_m0(lcom1_up, m0, r0, m0_materialization):
    result = propagate(lcom1_up, m0.facts, r0, m0_materialization)
    assert result.induced.deleted(LP) == rows(
        ("c1", "m1", "m3"), ("c1", "m3", "m1"), ("c1", "m2", "m3"), ("c1", "m3", "m2"),
    )
    assert result.induced.added(LP) == rows(("c2", "m3", "m3"))
    assert result.induced.added(CP) == frozenset()
    assert result.induced.deleted(CP) == frozenset()
    assert result.added(CM) == rows(("c2", "m3"))
    assert result.deleted(CM) == rows(("c1", "m3"))


def test_move_method_agrees_with_oracle(lcom1_set, m0, r0):
    assert check_against_oracle(lcom1_set, m0.facts, r0).is_empty


def test_seed_must_be_a_base_predicate(lcom1_up, m0):
    with pytest.raises(SeedPredicateUnknown):
        propagate(lcom1_up, m0.facts, DeltaSet(additions={CP: {("c1", "m1", "m3")}}))


def test_query_new_reads_the_new_state(lcom1_up, m0, r0):
    result = propagate(lcom1_up, m0.facts, r0)
    pattern = Atom("lp", (Constant("c1"), Variable("M"), Variable("N")))
    assert result.query_new(pattern) == []
    assert result.query_new(Atom("cm", (Constant("c2"), Variable("M")))) == [{"M": "m3"}]


def test_recursive_states_are_saturated():
    rules = parse_rules(
        "path(X, Y) :- edge(X, Y).\n"
        "path(X, Z) :- edge(X, Y), path(Y, Z).\n"
        "cut(X, Y) :- node(X), node(Y), not(path(X, Y)).",
        [("edge", 2), ("node", 1)],
    )
    base = FactBase(parse_fact_file(
        "node(1). node(2). node(3). node(4). edge(1, 2). edge(2, 3). edge(1, 4). edge(4, 3)."
    ))
    edge = Predicate("edge", 2)
    for seeds in (
        DeltaSet(deletions={edge: {(1, 2)}}),
        DeltaSet(deletions={edge: {(1, 2), (4, 3)}}),
        DeltaSet(additions={edge: {(3, 1)}}),
        DeltaSet(additions={edge: {(3, 1)}}, deletions={edge: {(2, 3)}}),
    ):
        diff = check_against_oracle(rules, base, seeds)
        assert diff.is_empty, str(diff)


def test_alternative_derivations_need_effectiveness_tests(lcom1_set):
    """cp(c1, m1, m2) holds through f1 and through f2; only f1 goes away."""
    model = CohesionModel.parse(
        "c(c1). cm(c1, m1). cm(c1, m2). cf(c1, f1). cf(c1, f2).\n"
        "mf(m1, f1). mf(m2, f1). mf(m1, f2). mf(m2, f2)."
    )
    seeds = DeltaSet(deletions={MF: {("m1", "f1")}})
    assert check_against_oracle(lcom1_set, model.facts, seeds).is_empty

    diff = check_against_oracle(
        lcom1_set, model.facts, seeds, TransformOptions(effectiveness_tests=False)
    )
    assert diff
    assert ("c1", "m1", "m2") in diff.missing[CP]
    assert ("c1", "m1", "m2") in diff.unexpected[LP]
    assert "missing cp(c1, m1, m2)" in str(diff)


def random_update(model: CohesionModel, rng: random.Random) -> DeltaSet:
    """Insert or delete one base fact over ids the model already uses."""
    classes = sorted(model.classes()) or ["k1"]
    methods = sorted(model.methods())
    fields = sorted({f for _, f in model.facts.tuples(CF)})
    candidates = [(C, lambda: (f"k{rng.randint(1, 12)}",))]
    if methods:
        candidates.append((CM, lambda: (rng.choice(classes), rng.choice(methods))))
    if fields:
        candidates.append((CF, lambda: (rng.choice(classes), rng.choice(fields))))
    if methods and fields:
        candidates.append((MF, lambda: (rng.choice(methods), rng.choice(fields))))
    predicate, draw = rng.choice(candidates)
    row = draw()
    raw = DeltaSet()
    if model.facts.contains(predicate, row):
        raw.delete_row(predicate, row)
    else:
        raw.add_row(predicate, row)
    return raw


def test_single_fact_updates_agree_with_oracle(lcom1_set, lcom1_up):
    rng = random.Random(2024)
    for trial in range(1000):
        model = random_model(rng, max_classes=6, max_methods=5, max_fields=5)
        seeds, _ = normalize_seeds(model.facts, random_update(model, rng))
        diff = check_against_oracle(lcom1_set, model.facts, seeds, transformed=lcom1_up)
        assert diff.is_empty, f"trial {trial}, seeds {seeds}:\n{diff}"


def test_random_refactorings_agree_with_oracle(lcom1_set, lcom1_up):
    rng = random.Random(42)
    trials = 0
    while trials < 1000:
        model = random_model(rng)
        if not model.methods() and not model.facts.tuples(CF):
            continue
        spec = random_refactoring(model, rng)
        seeds, _ = normalize_seeds(model.facts, seeds_for(spec, model))
        old = evaluate(lcom1_set, model.facts)
        result = propagate(lcom1_up, model.facts, seeds, old)
        oracle = evaluate(lcom1_set, apply_delta_set(model.facts, seeds))
        for predicate in (CP, LP):
            assert result.new_state(predicate) == oracle.tuples(predicate), f"{spec} on {model}"
            assert not result.induced.added(predicate) & old.tuples(predicate)
            assert result.induced.deleted(predicate) <= old.tuples(predicate)
        assert remap_incremental(lcom1_all(old), result) == lcom1_all(oracle)
        trials += 1


def test_pair_relations_are_symmetric(lcom1_set):
    rng = random.Random(3)
    for _ in range(50):
        state = evaluate(lcom1_set, random_model(rng).facts)
        for predicate in (CP, LP):
            pairs = state.tuples(predicate)
            assert {(c, n, m) for c, m, n in pairs} == pairs


def test_update_sequences_keep_metric_in_step(lcom1_set, lcom1_up):
    rng = random.Random(11)
    for _ in range(20):
        model = random_model(rng)
        old = evaluate(lcom1_set, model.facts)
        values = lcom1_all(old)
        for _ in range(5):
            seeds, _ = normalize_seeds(model.facts, random_update(model, rng))
            result = propagate(lcom1_up, model.facts, seeds, old)
            values = remap_incremental(values, result)
            model = model.apply(seeds)
            old = evaluate(lcom1_set, model.facts)
            assert values == lcom1_all(old)
