import logging

import pytest

from conftest import data_path, read_data, rows

from upcohesion.errors import DanglingReference, DuplicateElementId, UnknownClass, UnknownFactPredicate
from upcohesion.facts import DeltaSet
from upcohesion.model import (
    C,
    CF,
    CM,
    MF,
    MM,
    CohesionModel,
    ProgramElementFacts,
    derive_model,
    source_class,
)


def test_pef_of_m0_derives_m0(m0):
    model = derive_model(ProgramElementFacts.load(data_path("m0_pef.pl")))
    assert model == m0
    assert "m0" not in model.methods()


def test_filtered_classes_and_constructors():
    pef = ProgramElementFacts.parse(read_data("filters_pef.pl"))
    assert [source_class(pef, c) for c in (1, 2, 3, 4)] == [True, False, False, False]
    model = derive_model(pef)
    assert model.facts.tuples(C) == rows((1,))
    assert model.facts.tuples(CM) == rows((1, 10), (1, 12))
    assert model.facts.tuples(CF) == rows((1, 50))
    assert model.facts.tuples(MF) == rows((10, 50))
    assert model.facts.tuples(MM) == rows((12, 10))


def test_derivation_is_logged(caplog):
    with caplog.at_level(logging.INFO, logger="upcohesion"):
        derive_model(ProgramElementFacts.parse(read_data("m0_pef.pl")))
    assert "derived model from 1 classes" in caplog.text


def test_source_class_needs_a_known_id():
    pef = ProgramElementFacts.parse("classT(c1, p1, 'A').")
    with pytest.raises(UnknownClass):
        source_class(pef, "c2")


def test_unknown_pef_predicate_reports_its_line():
    with pytest.raises(UnknownFactPredicate) as info:
        ProgramElementFacts.parse("classT(c1, p1, 'A').\nmethodT(m1, c1).\n")
    assert info.value.line == 2


@pytest.mark.parametrize(
    "text",
    [
        "methodT(m1, c9, run).",
        "classT(c1, p, 'A'). accessT(m1, f1).",
        "classT(c1, p, 'A'). methodT(m1, c1, run). callT(m1, m2).",
        "interfaceT(c3).",
    ],
)
def test_dangling_references(text):
    with pytest.raises(DanglingReference):
        ProgramElementFacts.parse(text)


def test_element_ids_are_unique():
    with pytest.raises(DuplicateElementId):
        ProgramElementFacts.parse("classT(c1, p, 'A'). methodT(c1, c1, run).")
    with pytest.raises(DuplicateElementId):
        ProgramElementFacts.parse("classT(c1, p, 'A'). classT(c1, p, 'B').")
    pef = ProgramElementFacts.parse("classT(c1, p, 'A'). classT(c1, p, 'A').")
    assert list(pef.classes) == ["c1"]


def test_model_file_is_checked():
    with pytest.raises(UnknownFactPredicate):
        CohesionModel.parse("c(c1). lp(c1, m1, m2).")
    with pytest.raises(DanglingReference):
        CohesionModel.parse("c(c1). cm(c2, m1).")
    with pytest.raises(DanglingReference):
        CohesionModel.parse("c(c1). cm(c1, m1). mf(m1, f9).")


def test_model_queries(m0):
    assert m0.classes() == {"c1"}
    assert m0.methods_of("c1") == ["m1", "m2", "m3"]
    assert m0.fields_of("c1") == ["f1", "f2"]
    assert m0.element_ids() == {"c1", "m1", "m2", "m3", "f1", "f2"}
    assert m0.counts()[CM] == 3


def test_apply_leaves_the_model_alone(m0, r0):
    after = m0.apply(r0)
    assert len(after.facts.tuples(CM)) == 3
    assert after.methods_of("c1") == ["m1", "m2"]
    assert after.methods_of("c2") == ["m3"]
    assert m0.methods_of("c1") == ["m1", "m2", "m3"]
    assert after.apply(r0.inverse()) == m0
    assert m0.apply(DeltaSet()) == m0


def test_render_parses_back(m0):
    text = m0.render()
    assert text.splitlines()[0] == "c(c1)."
    assert CohesionModel.parse(text) == m0


@pytest.mark.parametrize(
    "markers",
    [["interfaceT(2).\n"], ["externT(3).\n"], ["interfaceT(2).\n", "externT(3).\n"]],
)
def test_dropping_a_marker_only_adds_model_facts(markers):
    text = read_data("filters_pef.pl")
    original = derive_model(ProgramElementFacts.parse(text))
    for marker in markers:
        assert marker in text
        text = text.replace(marker, "")
    widened = derive_model(ProgramElementFacts.parse(text))
    for predicate in (C, CM, CF, MF, MM):
        assert original.facts.tuples(predicate) <= widened.facts.tuples(predicate)
    assert len(widened.facts) > len(original.facts)
