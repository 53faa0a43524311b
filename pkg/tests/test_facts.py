import logging

import pytest

from upcohesion.errors import ConflictingSeed
from upcohesion.facts import (
    DeltaSet,
    FactBase,
    Relation,
    apply_delta_set,
    normalize_seeds,
    query,
)
from upcohesion.logic import Atom, Constant, Predicate, Variable
from upcohesion.parser import parse_fact_file

CM = Predicate("cm", 2)
C = Predicate("c", 1)


@pytest.fixture
def base():
    return FactBase(parse_fact_file("c(c1). cm(c1, m1). cm(c1, m2). cm(c2, m3)."))


def test_set_semantics(base):
    assert not base.add(Atom.from_row(C, ("c1",)))
    assert len(base) == 4
    assert base.remove_row(CM, ("c1", "m1"))
    assert not base.remove_row(CM, ("c1", "m1"))


def test_only_ground_facts_are_stored():
    with pytest.raises(ValueError):
        FactBase().add(Atom("c", (Variable("X"),)))


def test_lookup_by_bound_positions(base):
    assert set(base.lookup(CM, ((0, "c1"),))) == {("c1", "m1"), ("c1", "m2")}
    assert set(base.lookup(CM, ((1, "m3"),))) == {("c2", "m3")}
    assert list(base.lookup(CM, ((0, "c1"), (1, "m9")))) == []
    assert list(base.lookup(Predicate("zz", 1))) == []


def test_indexes_follow_mutation():
    relation = Relation(2, [("a", 1)])
    assert set(relation.lookup(((0, "a"),))) == {("a", 1)}
    relation.add(("a", 2))
    relation.discard(("a", 1))
    assert set(relation.lookup(((0, "a"),))) == {("a", 2)}


def test_snapshot_is_isolated(base):
    snapshot = base.snapshot()
    base.add_row(C, ("c2",))
    assert not snapshot.contains(C, ("c2",))
    assert snapshot.snapshot() is snapshot
    assert snapshot != base


def test_query_orders_and_binds(base):
    found = query(base, Atom("cm", (Constant("c1"), Variable("M"))))
    assert found == [{"M": "m1"}, {"M": "m2"}]
    assert query(base, Atom("c", (Constant("c1"),))) == [{}]
    assert query(base, Atom("cm", (Variable("X"), Variable("X")))) == []


def test_normalize_drops_ineffective_seeds(base, caplog):
    raw = DeltaSet()
    raw.add_row(C, ("c1",))
    raw.delete_row(C, ("c9",))
    raw.delete_row(CM, ("c1", "m1"))
    with caplog.at_level(logging.WARNING, logger="upcohesion"):
        seeds, warnings = normalize_seeds(base, raw)
    assert seeds == DeltaSet(deletions={CM: {("c1", "m1")}})
    assert {w.reason for w in warnings} == {"addition of present fact", "deletion of absent fact"}
    assert "dropped seed" in caplog.text


def test_normalize_rejects_conflicts(base):
    raw = DeltaSet(additions={C: {("c5",)}}, deletions={C: {("c5",)}})
    with pytest.raises(ConflictingSeed):
        normalize_seeds(base, raw)


def test_apply_delta_set_leaves_input_untouched(base):
    deltas = DeltaSet(additions={C: {("c2",)}}, deletions={CM: {("c1", "m1")}})
    updated = apply_delta_set(base, deltas)
    assert updated.contains(C, ("c2",)) and not updated.contains(CM, ("c1", "m1"))
    assert base.contains(CM, ("c1", "m1")) and not base.contains(C, ("c2",))


def test_delta_set_equality_ignores_empty_entries():
    a = DeltaSet(additions={C: set()}, deletions={CM: {("c1", "m1")}})
    b = DeltaSet(deletions={CM: {("c1", "m1")}})
    assert a == b
    assert DeltaSet().is_empty()
    assert a.inverse() == DeltaSet(additions={CM: {("c1", "m1")}})


def test_prefixed_atoms_read_back():
    deltas = DeltaSet(additions={C: {("c2",)}}, deletions={CM: {("c1", "m3")}})
    atoms = deltas.prefixed_atoms()
    assert [str(a) for a in atoms] == ["add_c(c2)", "del_cm(c1, m3)"]
    assert DeltaSet.from_prefixed_atoms(atoms) == deltas
    with pytest.raises(ValueError):
        DeltaSet.from_prefixed_atoms([Atom("cm", (Constant("c1"), Constant("m3")))])
