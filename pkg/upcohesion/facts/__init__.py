"""
Extensional fact storage with set semantics.

A FactBase is the single-writer store; Snapshot is its frozen view; DeltaSet
holds per-predicate insertions and deletions (UP seeds and induced deltas).
Every store answers `lookup(predicate, bound)`, where `bound` is a tuple of
(position, value) pairs; this is the access path the evaluator joins over.
"""
from typing import Dict, FrozenSet, Iterable, Iterator, List, Tuple

import logging
from dataclasses import dataclass

from ..errors import ConflictingSeed
from ..logic import Atom, Constant, Predicate, Row, Variable, sorted_rows

logger = logging.getLogger(__name__)

Bound = Tuple[Tuple[int, object], ...]
Substitution = Dict[str, object]


class Relation:
    """
    A set of ground rows of one arity, with lazily built hash indexes.

    Indexes are keyed by the tuple of bound positions and maintained on
    mutation once built.
    """

    __slots__ = ("arity", "_rows", "_indexes")

    def __init__(self, arity: int, rows: Iterable[Row] = ()) -> None:
        self.arity = arity
        self._rows = set(rows)
        self._indexes: Dict[Tuple[int, ...], Dict[tuple, set]] = {}

    def add(self, row: Row) -> bool:
        if row in self._rows:
            return False
        self._rows.add(row)
        for positions, index in self._indexes.items():
            index.setdefault(tuple(row[p] for p in positions), set()).add(row)
        return True

    def discard(self, row: Row) -> bool:
        if row not in self._rows:
            return False
        self._rows.discard(row)
        for positions, index in self._indexes.items():
            bucket = index.get(tuple(row[p] for p in positions))
            if bucket is not None:
                bucket.discard(row)
        return True

    def lookup(self, bound: Bound = ()) -> Iterable[Row]:
        if not bound:
            return self._rows
        if len(bound) == self.arity:
            row = tuple(v for _, v in bound)
            return (row,) if row in self._rows else ()
        positions = tuple(p for p, _ in bound)
        index = self._indexes.get(positions)
        if index is None:
            index = {}
            for row in self._rows:
                index.setdefault(tuple(row[p] for p in positions), set()).add(row)
            self._indexes[positions] = index
        return index.get(tuple(v for _, v in bound), ())

    def rows(self) -> FrozenSet[Row]:
        return frozenset(self._rows)

    def copy(self) -> "Relation":
        return Relation(self.arity, self._rows)

    def __contains__(self, row) -> bool:
        return row in self._rows

    def __iter__(self) -> Iterator[Row]:
        return iter(self._rows)

    def __len__(self) -> int:
        return len(self._rows)

    def __repr__(self) -> str:
        return f"Relation(arity={self.arity}, rows={len(self._rows)})"


_EMPTY: FrozenSet[Row] = frozenset()


class _Store:
    """Read access shared by FactBase and Snapshot."""

    _relations: Dict[Predicate, Relation]

    def lookup(self, predicate: Predicate, bound: Bound = ()) -> Iterable[Row]:
        relation = self._relations.get(predicate)
        return relation.lookup(bound) if relation is not None else ()

    def contains(self, predicate: Predicate, row: Row) -> bool:
        relation = self._relations.get(predicate)
        return relation is not None and row in relation

    def tuples(self, predicate: Predicate) -> FrozenSet[Row]:
        relation = self._relations.get(predicate)
        return relation.rows() if relation is not None else _EMPTY

    def predicates(self) -> FrozenSet[Predicate]:
        return frozenset(p for p, r in self._relations.items() if len(r))

    def atoms(self) -> List[Atom]:
        """Every stored fact, deterministically ordered."""
        out = []
        for predicate in sorted(self.predicates()):
            out.extend(Atom.from_row(predicate, row) for row in sorted_rows(self.tuples(predicate)))
        return out

    def __len__(self) -> int:
        return sum(len(r) for r in self._relations.values())

    def __eq__(self, other) -> bool:
        if not isinstance(other, _Store):
            return NotImplemented
        preds = self.predicates() | other.predicates()
        return all(self.tuples(p) == other.tuples(p) for p in preds)

    __hash__ = None


class Snapshot(_Store):
    """An immutable view of a FactBase at one point in time."""

    def __init__(self, relations: Dict[Predicate, Relation]) -> None:
        self._relations = {p: r.copy() for p, r in relations.items()}

    def snapshot(self) -> "Snapshot":
        return self

    def __repr__(self) -> str:
        return f"Snapshot({len(self)} facts)"


class FactBase(_Store):
    """
    The extensional fact base.

    Asserting a fact twice is indistinguishable from asserting it once.
    """

    def __init__(self, atoms: Iterable[Atom] = ()) -> None:
        self._relations: Dict[Predicate, Relation] = {}
        for atom in atoms:
            self.add(atom)

    @classmethod
    def from_rows(cls, rows: Dict[Predicate, Iterable[Row]]) -> "FactBase":
        base = cls()
        for predicate, predicate_rows in rows.items():
            for row in predicate_rows:
                base.add_row(Predicate(*predicate), tuple(row))
        return base

    def add(self, atom: Atom) -> bool:
        if not atom.is_ground() or not atom.is_flat():
            raise ValueError(f"only ground flat facts can be stored, got {atom}")
        return self.add_row(atom.predicate, atom.row())

    def add_row(self, predicate: Predicate, row: Row) -> bool:
        relation = self._relations.get(predicate)
        if relation is None:
            relation = self._relations[predicate] = Relation(predicate.arity)
        return relation.add(row)

    def remove_row(self, predicate: Predicate, row: Row) -> bool:
        relation = self._relations.get(predicate)
        return relation is not None and relation.discard(row)

    def snapshot(self) -> Snapshot:
        return Snapshot(self._relations)

    def copy(self) -> "FactBase":
        base = FactBase()
        base._relations = {p: r.copy() for p, r in self._relations.items()}
        return base

    def __repr__(self) -> str:
        return f"FactBase({len(self)} facts)"


def query(base: _Store, pattern: Atom) -> List[Substitution]:
    """
    Match a pattern against stored facts.

    Arguments:
        base (Union[FactBase, Snapshot]): Where to look
        pattern (Atom): Constants must match; variables are bound

    Returns:
        List[dict]: One substitution per matching fact, in tuple order.
            A ground pattern that is present yields one empty substitution.

    """
    bound = tuple(
        (i, a.value) for i, a in enumerate(pattern.args) if isinstance(a, Constant)
    )
    return match_rows(pattern, base.lookup(pattern.predicate, bound))


def match_rows(pattern: Atom, rows: Iterable[Row]) -> List[Substitution]:
    found = {}
    for row in sorted_rows(rows):
        theta: Substitution = {}
        for arg, value in zip(pattern.args, row):
            if isinstance(arg, Variable):
                if theta.setdefault(arg.name, value) != value:
                    break
            elif arg.value != value:
                break
        else:
            found.setdefault(tuple(sorted(theta.items(), key=lambda kv: kv[0])), theta)
    return list(found.values())


@dataclass(frozen=True)
class SeedWarning:
    reason: str
    predicate: Predicate
    row: Row

    def __str__(self) -> str:
        atom = Atom.from_row(self.predicate, self.row)
        return f"{self.reason}: {atom}"


class DeltaSet:
    """
    Insertions and deletions per predicate.

    Empty entries are insignificant: two DeltaSets are equal when they hold
    the same non-empty sets.
    """

    def __init__(self, additions=None, deletions=None) -> None:
        self.additions: Dict[Predicate, set] = {}
        self.deletions: Dict[Predicate, set] = {}
        for predicate, rows in (additions or {}).items():
            for row in rows:
                self.add_row(Predicate(*predicate), tuple(row))
        for predicate, rows in (deletions or {}).items():
            for row in rows:
                self.delete_row(Predicate(*predicate), tuple(row))

    @classmethod
    def from_atoms(cls, additions: Iterable[Atom] = (), deletions: Iterable[Atom] = ()) -> "DeltaSet":
        deltas = cls()
        for atom in additions:
            deltas.add(atom)
        for atom in deletions:
            deltas.delete(atom)
        return deltas

    @classmethod
    def from_prefixed_atoms(cls, atoms: Iterable[Atom]) -> "DeltaSet":
        """Read `add_p(...)` / `del_p(...)` facts back into a DeltaSet."""
        deltas = cls()
        for atom in atoms:
            prefix, _, name = atom.name.partition("_")
            if prefix == "add" and name:
                deltas.add(atom.renamed(name))
            elif prefix == "del" and name:
                deltas.delete(atom.renamed(name))
            else:
                raise ValueError(f"{atom} is not a delta fact")
        return deltas

    def add(self, atom: Atom) -> None:
        self.add_row(atom.predicate, atom.row())

    def delete(self, atom: Atom) -> None:
        self.delete_row(atom.predicate, atom.row())

    def add_row(self, predicate: Predicate, row: Row) -> None:
        self.additions.setdefault(predicate, set()).add(row)

    def delete_row(self, predicate: Predicate, row: Row) -> None:
        self.deletions.setdefault(predicate, set()).add(row)

    def added(self, predicate: Predicate) -> FrozenSet[Row]:
        return frozenset(self.additions.get(predicate, ()))

    def deleted(self, predicate: Predicate) -> FrozenSet[Row]:
        return frozenset(self.deletions.get(predicate, ()))

    def predicates(self) -> FrozenSet[Predicate]:
        return frozenset(
            [p for p, r in self.additions.items() if r]
            + [p for p, r in self.deletions.items() if r]
        )

    def inverse(self) -> "DeltaSet":
        return DeltaSet(additions=self.deletions, deletions=self.additions)

    def restricted(self, predicates: Iterable[Predicate]) -> "DeltaSet":
        keep = set(predicates)
        return DeltaSet(
            additions={p: r for p, r in self.additions.items() if p in keep},
            deletions={p: r for p, r in self.deletions.items() if p in keep},
        )

    def is_empty(self) -> bool:
        return not self.predicates()

    def prefixed_atoms(self) -> List[Atom]:
        """The deltas as `add_p` / `del_p` facts, deterministically ordered."""
        out = []
        for predicate in sorted(self.predicates()):
            for row in sorted_rows(self.deletions.get(predicate, ())):
                out.append(Atom.from_row(Predicate("del_" + predicate.name, predicate.arity), row))
            for row in sorted_rows(self.additions.get(predicate, ())):
                out.append(Atom.from_row(Predicate("add_" + predicate.name, predicate.arity), row))
        return out

    def __len__(self) -> int:
        return sum(len(r) for r in self.additions.values()) + sum(
            len(r) for r in self.deletions.values()
        )

    def __eq__(self, other) -> bool:
        if not isinstance(other, DeltaSet):
            return NotImplemented
        return all(
            self.added(p) == other.added(p) and self.deleted(p) == other.deleted(p)
            for p in self.predicates() | other.predicates()
        )

    __hash__ = None

    def __repr__(self) -> str:
        return "DeltaSet(" + ", ".join(str(a) for a in self.prefixed_atoms()) + ")"


def normalize_seeds(base: _Store, raw: DeltaSet) -> Tuple[DeltaSet, List[SeedWarning]]:
    """
    Make raw seeds effective against a fact base.

    Deletions of absent facts and additions of present facts are dropped, each
    with a warning.

    Arguments:
        base (Union[FactBase, Snapshot]): The state the seeds apply to
        raw (DeltaSet): Ground seed tuples

    Returns:
        Tuple[DeltaSet, List[SeedWarning]]: The normalized seeds and the drops

    """
    normalized = DeltaSet()
    warnings: List[SeedWarning] = []
    for predicate in sorted(raw.predicates()):
        conflicts = raw.added(predicate) & raw.deleted(predicate)
        if conflicts:
            row = sorted_rows(conflicts)[0]
            raise ConflictingSeed(
                f"{Atom.from_row(predicate, row)} is both inserted and deleted"
            )
        for row in sorted_rows(raw.deleted(predicate)):
            if base.contains(predicate, row):
                normalized.delete_row(predicate, row)
            else:
                warnings.append(SeedWarning("deletion of absent fact", predicate, row))
        for row in sorted_rows(raw.added(predicate)):
            if base.contains(predicate, row):
                warnings.append(SeedWarning("addition of present fact", predicate, row))
            else:
                normalized.add_row(predicate, row)
    for warning in warnings:
        logger.warning("dropped seed, %s", warning)
    return normalized, warnings


def apply_delta_set(base: _Store, deltas: DeltaSet) -> FactBase:
    """
    Compute (base \\ deletions) U additions per predicate.

    The input is left untouched.

    Arguments:
        base (Union[FactBase, Snapshot]): The starting state
        deltas (DeltaSet): Normalized deltas

    Returns:
        FactBase: The updated fact base

    """
    result = FactBase()
    result._relations = {p: r.copy() for p, r in base._relations.items()}
    for predicate, rows in deltas.deletions.items():
        for row in rows:
            result.remove_row(predicate, row)
    for predicate, rows in deltas.additions.items():
        for row in rows:
            result.add_row(predicate, row)
    return result
