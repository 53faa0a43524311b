import os
import random

import pytest

from upcohesion.engine import evaluate
from upcohesion.facts import DeltaSet, FactBase
from upcohesion.logic import Predicate
from upcohesion.metrics import lcom1_rules
from upcohesion.model import CohesionModel
from upcohesion.parser import parse_fact_file, parse_rules
from upcohesion.transform import transform

DATA = os.path.join(os.path.dirname(__file__), "data")

PQR_RULES = "p(X) :- q(X, Y), r(Y), not(s(Y))."
PQR_FACTS = """
q(1, 2). q(2, 3). q(3, 4).
r(3). r(4). r(5).
s(4). s(5). s(6).
"""
PQR_EXTENSIONAL = [("q", 2), ("r", 1), ("s", 1)]


def data_path(name: str) -> str:
    return os.path.join(DATA, name)


def read_data(name: str) -> str:
    with open(data_path(name)) as handle:
        return handle.read()


def rows(*values):
    return frozenset(tuple(v) for v in values)


@pytest.fixture
def m0() -> CohesionModel:
    return CohesionModel.parse(read_data("m0.pl"))


@pytest.fixture
def lcom1_set():
    return lcom1_rules()


@pytest.fixture(scope="session")
def lcom1_up():
    return transform(lcom1_rules())


@pytest.fixture
def r0() -> DeltaSet:
    """Move m3 out of c1 into the new class c2."""
    deltas = DeltaSet()
    deltas.add_row(Predicate("c", 1), ("c2",))
    deltas.delete_row(Predicate("cm", 2), ("c1", "m3"))
    deltas.add_row(Predicate("cm", 2), ("c2", "m3"))
    return deltas


@pytest.fixture
def pqr_program():
    rules = parse_rules(PQR_RULES, PQR_EXTENSIONAL)
    base = FactBase(parse_fact_file(PQR_FACTS))
    return rules, base


def random_model(rng: random.Random, max_classes=10, max_methods=8, max_fields=8) -> CohesionModel:
    """A small model with ragged class sizes and random accesses."""
    facts = FactBase()
    classes = [f"k{i}" for i in range(1, rng.randint(1, max_classes) + 1)]
    all_fields = []
    members = {}
    for class_id in classes:
        facts.add_row(Predicate("c", 1), (class_id,))
        methods = [f"{class_id}m{j}" for j in range(rng.randint(0, max_methods))]
        fields = [f"{class_id}f{k}" for k in range(rng.randint(0, max_fields))]
        for method in methods:
            facts.add_row(Predicate("cm", 2), (class_id, method))
        for field in fields:
            facts.add_row(Predicate("cf", 2), (class_id, field))
        members[class_id] = (methods, fields)
        all_fields.extend(fields)
    for class_id in classes:
        methods, fields = members[class_id]
        for method in methods:
            for field in fields:
                if rng.random() < 0.4:
                    facts.add_row(Predicate("mf", 2), (method, field))
            if all_fields and rng.random() < 0.3:
                facts.add_row(Predicate("mf", 2), (method, rng.choice(all_fields)))
    return CohesionModel(facts)


@pytest.fixture
def m0_materialization(m0):
    return evaluate(lcom1_rules(), m0.facts)


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="run tests marked slow")


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: full-size benchmark runs, skipped without --runslow")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip)
