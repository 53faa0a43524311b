"""
Program element facts and the cohesion model derived from them.

Program element facts (PEF) describe classes, methods, fields, calls and
field accesses. `derive_model` filters them down to the five cohesion model
relations the metrics are written against:

    c(C)        C is a source class
    cm(C, M)    class C contains method M
    cf(C, F)    class C contains field F
    mf(M, F)    method M accesses field F
    mm(M, N)    method M calls method N
"""
from typing import Dict, FrozenSet, Iterable, List, Tuple

import logging
from dataclasses import dataclass, field

from ..errors import DanglingReference, DuplicateElementId, UnknownClass, UnknownFactPredicate
from ..facts import DeltaSet, FactBase, apply_delta_set
from ..logic import Atom, Predicate, Value, render_atom, sorted_rows, value_key
from ..parser import parse_located_facts

logger = logging.getLogger(__name__)

PEF_SCHEMA = {
    "classT": 3,
    "interfaceT": 1,
    "externT": 1,
    "methodT": 3,
    "fieldT": 3,
    "callT": 2,
    "accessT": 2,
}

C = Predicate("c", 1)
CM = Predicate("cm", 2)
CF = Predicate("cf", 2)
MF = Predicate("mf", 2)
MM = Predicate("mm", 2)
MODEL_PREDICATES = (C, CM, CF, MF, MM)

ANONYMOUS_PREFIX = "ANONYMOUS$"
CONSTRUCTOR_NAME = "<init>"


def _located(text: str, schema: Dict[str, int], what: str) -> List[Tuple[Atom, int]]:
    located = parse_located_facts(text)
    for atom, line in located:
        if schema.get(atom.name) != len(atom.args):
            raise UnknownFactPredicate(f"{atom.predicate} is not a {what} predicate", line)
    return located


@dataclass
class ProgramElementFacts:
    """
    The ingestable description of a program.

    Elements map their id to (container id, name); for classes the container
    is the owner (package or enclosing element), which the model ignores.
    """

    classes: Dict[Value, Tuple[Value, Value]] = field(default_factory=dict)
    interfaces: FrozenSet[Value] = frozenset()
    externs: FrozenSet[Value] = frozenset()
    methods: Dict[Value, Tuple[Value, Value]] = field(default_factory=dict)
    fields: Dict[Value, Tuple[Value, Value]] = field(default_factory=dict)
    calls: FrozenSet[Tuple[Value, Value]] = frozenset()
    accesses: FrozenSet[Tuple[Value, Value]] = frozenset()

    @classmethod
    def from_atoms(cls, atoms: Iterable[Atom]) -> "ProgramElementFacts":
        return cls._build((atom, None) for atom in atoms)

    @classmethod
    def parse(cls, text: str) -> "ProgramElementFacts":
        """
        Read a PEF fact file.

        Arguments:
            text (str): Facts over the seven PEF predicates only

        Returns:
            ProgramElementFacts: The checked program description

        """
        return cls._build(parse_located_facts(text))

    @classmethod
    def load(cls, path: str) -> "ProgramElementFacts":
        with open(path) as handle:
            return cls.parse(handle.read())

    @classmethod
    def _build(cls, located) -> "ProgramElementFacts":
        elements = {"classT": {}, "methodT": {}, "fieldT": {}}
        owner_kind: Dict[Value, str] = {}
        markers = {"interfaceT": set(), "externT": set()}
        links = {"callT": set(), "accessT": set()}
        for atom, line in located:
            if PEF_SCHEMA.get(atom.name) != len(atom.args):
                raise UnknownFactPredicate(
                    f"{atom.predicate} is not a program element fact predicate", line
                )
            row = atom.row()
            if atom.name in elements:
                ident, rest = row[0], row[1:]
                known = owner_kind.setdefault(ident, atom.name)
                table = elements[atom.name]
                if known != atom.name or table.get(ident, rest) != rest:
                    raise DuplicateElementId(f"element id {ident} is used twice ({atom})")
                table[ident] = rest
            elif atom.name in markers:
                markers[atom.name].add(row[0])
            else:
                links[atom.name].add(row)
        pef = cls(
            classes=elements["classT"],
            interfaces=frozenset(markers["interfaceT"]),
            externs=frozenset(markers["externT"]),
            methods=elements["methodT"],
            fields=elements["fieldT"],
            calls=frozenset(links["callT"]),
            accesses=frozenset(links["accessT"]),
        )
        pef.check()
        return pef

    def check(self) -> None:
        """Raise DanglingReference for the first fact naming a missing element."""
        for name, ids in (("interfaceT", self.interfaces), ("externT", self.externs)):
            for ident in sorted(ids, key=value_key):
                if ident not in self.classes:
                    raise DanglingReference(f"{name}({ident}) names no class")
        for name, table in (("methodT", self.methods), ("fieldT", self.fields)):
            for ident, (owner, _) in sorted(table.items(), key=lambda kv: value_key(kv[0])):
                if owner not in self.classes:
                    raise DanglingReference(f"{name}({ident}, {owner}, ...) names no class")
        for caller, callee in sorted(self.calls, key=_pair_key):
            if caller not in self.methods or callee not in self.methods:
                raise DanglingReference(f"callT({caller}, {callee}) names no method")
        for method, fld in sorted(self.accesses, key=_pair_key):
            if method not in self.methods or fld not in self.fields:
                raise DanglingReference(f"accessT({method}, {fld}) names no method or field")


def _pair_key(pair):
    return tuple(value_key(v) for v in pair)


def source_class(pef: ProgramElementFacts, class_id: Value) -> bool:
    """
    Whether a class belongs to the analysed sources.

    Arguments:
        pef (ProgramElementFacts): The program description
        class_id: A classT id

    Returns:
        bool: False for extern classes, interfaces, and anonymous classes

    """
    if class_id not in pef.classes:
        raise UnknownClass(f"no class with id {class_id}")
    name = pef.classes[class_id][1]
    if class_id in pef.externs or class_id in pef.interfaces:
        return False
    return not str(name).startswith(ANONYMOUS_PREFIX)


class CohesionModel:
    """
    The c/cm/cf/mf/mm relations, held in a FactBase.

    A model is never mutated by analyses; `apply` returns a new model.
    """

    def __init__(self, facts: FactBase = None) -> None:
        self.facts = facts if facts is not None else FactBase()

    @classmethod
    def parse(cls, text: str) -> "CohesionModel":
        schema = {p.name: p.arity for p in MODEL_PREDICATES}
        model = cls(FactBase(atom for atom, _ in _located(text, schema, "cohesion model")))
        model.check()
        return model

    @classmethod
    def load(cls, path: str) -> "CohesionModel":
        with open(path) as handle:
            return cls.parse(handle.read())

    def check(self) -> None:
        classes = self.classes()
        methods = self.methods()
        fields_ = {row[1] for row in self.facts.tuples(CF)}
        for predicate in (CM, CF):
            for row in sorted_rows(self.facts.tuples(predicate)):
                if row[0] not in classes:
                    raise DanglingReference(f"{Atom.from_row(predicate, row)} names no class")
        for row in sorted_rows(self.facts.tuples(MF)):
            if row[0] not in methods or row[1] not in fields_:
                raise DanglingReference(f"{Atom.from_row(MF, row)} names no model element")
        for row in sorted_rows(self.facts.tuples(MM)):
            if row[0] not in methods or row[1] not in methods:
                raise DanglingReference(f"{Atom.from_row(MM, row)} names no model method")

    def classes(self) -> FrozenSet[Value]:
        return frozenset(row[0] for row in self.facts.tuples(C))

    def methods(self) -> FrozenSet[Value]:
        return frozenset(row[1] for row in self.facts.tuples(CM))

    def methods_of(self, class_id: Value) -> List[Value]:
        return sorted((row[1] for row in self.facts.lookup(CM, ((0, class_id),))), key=value_key)

    def fields_of(self, class_id: Value) -> List[Value]:
        return sorted((row[1] for row in self.facts.lookup(CF, ((0, class_id),))), key=value_key)

    def element_ids(self) -> FrozenSet[Value]:
        """Every class, method and field id the model mentions."""
        ids = set(self.classes())
        for predicate in (CM, CF, MF, MM):
            for row in self.facts.tuples(predicate):
                ids.update(row)
        return frozenset(ids)

    def snapshot(self):
        return self.facts.snapshot()

    def apply(self, deltas: DeltaSet) -> "CohesionModel":
        return CohesionModel(apply_delta_set(self.facts, deltas))

    def counts(self) -> Dict[Predicate, int]:
        return {p: len(self.facts.tuples(p)) for p in MODEL_PREDICATES}

    def render(self) -> str:
        """The model as a fact file, one fact per line, in a stable order."""
        lines = []
        for predicate in MODEL_PREDICATES:
            lines.extend(
                render_atom(Atom.from_row(predicate, row)) + "."
                for row in sorted_rows(self.facts.tuples(predicate))
            )
        return "".join(line + "\n" for line in lines)

    def __eq__(self, other) -> bool:
        if not isinstance(other, CohesionModel):
            return NotImplemented
        return self.facts == other.facts

    __hash__ = None

    def __repr__(self) -> str:
        sizes = ", ".join(f"{p.name}={n}" for p, n in self.counts().items())
        return f"CohesionModel({sizes})"


def derive_model(pef: ProgramElementFacts) -> CohesionModel:
    """
    Build the cohesion model of the source classes of a program.

    Constructors (methods named `<init>`) are left out, as are facts whose
    endpoints were filtered away.

    Arguments:
        pef (ProgramElementFacts): A checked program description

    Returns:
        CohesionModel: The c/cm/cf/mf/mm facts

    """
    pef.check()
    facts = FactBase()
    sources = {c for c in pef.classes if source_class(pef, c)}
    methods = set()
    fields_ = set()
    for class_id in sources:
        facts.add_row(C, (class_id,))
    for method, (owner, name) in pef.methods.items():
        if owner in sources and name != CONSTRUCTOR_NAME:
            methods.add(method)
            facts.add_row(CM, (owner, method))
    for fld, (owner, _) in pef.fields.items():
        if owner in sources:
            fields_.add(fld)
            facts.add_row(CF, (owner, fld))
    for method, fld in pef.accesses:
        if method in methods and fld in fields_:
            facts.add_row(MF, (method, fld))
    for caller, callee in pef.calls:
        if caller in methods and callee in methods:
            facts.add_row(MM, (caller, callee))
    model = CohesionModel(facts)
    logger.info(
        "derived model from %d classes: %s",
        len(pef.classes), ", ".join(f"{p.name}={n}" for p, n in model.counts().items()),
    )
    return model
