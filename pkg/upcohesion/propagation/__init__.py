"""
Incremental evaluation of a generated update propagation program.

`propagate` never materializes a new state. The add_/del_ relations of the
intensional predicates are saturated component by component, driven by the
seed deltas; every state literal (`nwd_`, `nwi_`) a propagation rule reads is
answered on demand, with the bindings the delta facts supply, and memoized
for the rest of the run.
"""
from typing import Dict, FrozenSet, Iterable, List, Tuple

import logging
from dataclasses import dataclass, field

from ..engine import (
    Materialization,
    Store,
    evaluate,
    ground_row,
    plan_body,
    saturate,
    solve,
)
from ..errors import SeedPredicateUnknown
from ..facts import Bound, DeltaSet, Relation, Substitution, apply_delta_set, match_rows
from ..logic import Atom, Constant, Predicate, Row, RuleSet
from ..transform import ADD, DEL, NWD, NWI, TransformOptions, TransformedRuleSet, prefixed, transform

logger = logging.getLogger(__name__)


class _RunStore(Store):
    """
    Everything a propagation rule can mention, for the duration of one run.

    Source predicates read the old materialization, delta predicates read the
    seeds or the relations computed so far, and state predicates are derived
    lazily from both.
    """

    def __init__(self, transformed: TransformedRuleSet, old: Materialization, seeds: DeltaSet) -> None:
        self.transformed = transformed
        self.old = old
        self.deltas: Dict[Predicate, Relation] = {}
        self.states: Dict[Predicate, Relation] = {}
        self.alphabet: Dict[Predicate, Tuple[str, Predicate]] = {}
        for predicate in transformed.source.predicates():
            for prefix in (ADD, DEL, NWD, NWI):
                self.alphabet[prefixed(prefix, predicate)] = (prefix, predicate)
        for predicate in seeds.predicates():
            self.deltas[prefixed(ADD, predicate)] = Relation(predicate.arity, seeds.added(predicate))
            self.deltas[prefixed(DEL, predicate)] = Relation(predicate.arity, seeds.deleted(predicate))
        self._indirect = {}
        for rule in transformed.indirect_transition_rules:
            self._indirect.setdefault(rule.predicate, []).append(rule)
        self._memo: Dict[Tuple[Predicate, Bound], FrozenSet[Row]] = {}
        self._plans = {}
        self.hits = 0

    def lookup(self, predicate, bound=()):
        relation = self.deltas.get(predicate)
        if relation is None:
            relation = self.states.get(predicate)
        if relation is not None:
            return relation.lookup(bound)
        entry = self.alphabet.get(predicate)
        if entry is None:
            return self.old.lookup(predicate, bound)
        prefix, source = entry
        if prefix in (ADD, DEL):
            return ()
        key = (predicate, tuple(bound))
        rows = self._memo.get(key)
        if rows is not None:
            self.hits += 1
            return rows
        if prefix == NWD:
            rows = self._direct(source, bound)
        elif predicate in self.transformed.schedule.recursive_states:
            self._saturate_states(self.transformed.schedule.recursive_states[predicate])
            return self.states[predicate].lookup(bound)
        else:
            rows = self._indirect_rows(predicate, bound)
        self._memo[key] = rows
        return rows

    def contains(self, predicate, row):
        return bool(self.lookup(predicate, tuple(enumerate(row))))

    def _delta(self, prefix: str, predicate: Predicate) -> Relation:
        return self.deltas.get(prefixed(prefix, predicate)) or Relation(predicate.arity)

    def _direct(self, predicate: Predicate, bound: Bound) -> FrozenSet[Row]:
        deleted = self._delta(DEL, predicate)
        kept = {row for row in self.old.lookup(predicate, bound) if row not in deleted}
        kept.update(self._delta(ADD, predicate).lookup(bound))
        return frozenset(kept)

    def _indirect_rows(self, predicate: Predicate, bound: Bound) -> FrozenSet[Row]:
        rows = set()
        for rule in self._indirect.get(predicate, ()):
            binding = _head_binding(rule.head, bound)
            if binding is None:
                continue
            key = (rule.id, frozenset(binding))
            plan = self._plans.get(key)
            if plan is None:
                plan = self._plans[key] = plan_body(rule.body, binding)
            for theta in solve(rule.body, self, binding, plan=plan):
                rows.add(ground_row(rule.head, theta))
        return frozenset(rows)

    def _saturate_states(self, component: FrozenSet[Predicate]) -> None:
        for predicate in component:
            self.states[predicate] = Relation(predicate.arity)
        rules = [r for p in sorted(component) for r in self._indirect.get(p, ())]
        rounds = saturate(rules, component, self, self.states)
        logger.debug(
            "saturated recursive state %s in %d rounds",
            ", ".join(str(p) for p in sorted(component)), rounds,
        )


def _head_binding(head: Atom, bound: Bound):
    binding: Substitution = {}
    for position, value in bound:
        arg = head.args[position]
        if isinstance(arg, Constant):
            if arg.value != value:
                return None
        elif binding.setdefault(arg.name, value) != value:
            return None
    return binding


class PropagationResult:
    """
    The outcome of one propagation run.

    `seeds` are the base deltas the run started from and `induced` the
    deltas of every intensional predicate. The new state of a predicate is
    (old \\ deletions) U additions, built on first use and cached.
    """

    def __init__(
        self,
        seeds: DeltaSet,
        induced: DeltaSet,
        old: Materialization,
        rules: RuleSet,
    ) -> None:
        self.seeds = seeds
        self.induced = induced
        self.old = old
        self.rules = rules
        self._new: Dict[Predicate, Relation] = {}

    def added(self, predicate: Predicate) -> FrozenSet[Row]:
        return self.seeds.added(predicate) | self.induced.added(predicate)

    def deleted(self, predicate: Predicate) -> FrozenSet[Row]:
        return self.seeds.deleted(predicate) | self.induced.deleted(predicate)

    def _relation(self, predicate: Predicate) -> Relation:
        relation = self._new.get(predicate)
        if relation is None:
            rows = (self.old.tuples(predicate) - self.deleted(predicate)) | self.added(predicate)
            relation = self._new[predicate] = Relation(predicate.arity, rows)
        return relation

    def new_state(self, predicate: Predicate) -> FrozenSet[Row]:
        return self._relation(predicate).rows()

    def lookup(self, predicate: Predicate, bound: Bound = ()) -> Iterable[Row]:
        """Read access to the hypothetical new state, for `solve` and metrics."""
        return self._relation(predicate).lookup(bound)

    def contains(self, predicate: Predicate, row: Row) -> bool:
        return row in self._relation(predicate)

    def tuples(self, predicate: Predicate) -> FrozenSet[Row]:
        return self.new_state(predicate)

    def query_new(self, pattern: Atom) -> List[Substitution]:
        """Match a pattern against the new state, e.g. to check a constraint."""
        bound = tuple(
            (i, a.value) for i, a in enumerate(pattern.args) if isinstance(a, Constant)
        )
        return match_rows(pattern, self.lookup(pattern.predicate, bound))

    def __repr__(self) -> str:
        return f"PropagationResult(seeds={len(self.seeds)}, induced={len(self.induced)})"


def propagate(
    transformed: TransformedRuleSet,
    old,
    seeds: DeltaSet,
    materialization: Materialization = None,
) -> PropagationResult:
    """
    Compute the induced deltas of a base update.

    Arguments:
        transformed (TransformedRuleSet): The generated program
        old (Union[Snapshot, FactBase]): The base before the update
        seeds (DeltaSet): Seeds, already normalized against `old`
        materialization (Materialization: None): The old state of the source
            rules over `old`; computed here when not given

    Returns:
        PropagationResult: Seeds, induced deltas, and lazy new states

    """
    base = transformed.source.base_predicates()
    for predicate in sorted(seeds.predicates()):
        if predicate not in base:
            raise SeedPredicateUnknown(
                f"seed predicate {predicate} is not a base predicate of the rules"
            )
    if materialization is None:
        materialization = evaluate(transformed.source, old)
    store = _RunStore(transformed, materialization, seeds)
    for component in transformed.schedule.delta_components:
        for predicate in component:
            store.deltas[predicate] = Relation(predicate.arity)
        rules = [r for r in transformed.propagation_rules if r.predicate in component]
        rounds = saturate(rules, component, store, store.deltas)
        logger.debug(
            "%s: %s after %d rounds",
            ", ".join(str(p) for p in sorted(component)),
            ", ".join(f"{len(store.deltas[p])}" for p in sorted(component)),
            rounds,
        )
    induced = DeltaSet()
    for predicate in transformed.source.intensional:
        for row in store.deltas.get(prefixed(ADD, predicate), ()):
            induced.add_row(predicate, row)
        for row in store.deltas.get(prefixed(DEL, predicate), ()):
            induced.delete_row(predicate, row)
    logger.debug("propagation done, %d induced deltas, %d memo hits", len(induced), store.hits)
    return PropagationResult(seeds, induced, materialization, transformed.source)


@dataclass
class Diff:
    """Rows the oracle has and the incremental state lacks, and vice versa."""

    missing: Dict[Predicate, FrozenSet[Row]] = field(default_factory=dict)
    unexpected: Dict[Predicate, FrozenSet[Row]] = field(default_factory=dict)

    @property
    def is_empty(self) -> bool:
        return not self.missing and not self.unexpected

    def __bool__(self) -> bool:
        return not self.is_empty

    def __str__(self) -> str:
        lines = []
        for label, rows_of in (("missing", self.missing), ("unexpected", self.unexpected)):
            for predicate in sorted(rows_of):
                for row in sorted(rows_of[predicate], key=repr):
                    lines.append(f"{label} {Atom.from_row(predicate, row)}")
        return "\n".join(lines)


def check_against_oracle(
    rules: RuleSet,
    old,
    seeds: DeltaSet,
    options: TransformOptions = TransformOptions(),
    transformed: TransformedRuleSet = None,
) -> Diff:
    """
    Compare propagation against full re-evaluation over the updated base.

    Arguments:
        rules (RuleSet): The source rules
        old (Union[Snapshot, FactBase]): The base before the update
        seeds (DeltaSet): Normalized seeds
        options (TransformOptions): Used when `transformed` is not given
        transformed (TransformedRuleSet: None): A precomputed transformation

    Returns:
        Diff: Empty when both agree on every predicate

    """
    if transformed is None:
        transformed = transform(rules, options)
    result = propagate(transformed, old, seeds)
    oracle = evaluate(rules, apply_delta_set(old, seeds))
    diff = Diff()
    for predicate in sorted(rules.predicates()):
        incremental = result.new_state(predicate)
        expected = oracle.tuples(predicate)
        if expected - incremental:
            diff.missing[predicate] = frozenset(expected - incremental)
        if incremental - expected:
            diff.unexpected[predicate] = frozenset(incremental - expected)
    return diff
