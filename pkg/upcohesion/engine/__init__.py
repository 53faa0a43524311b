"""
Bottom-up, stratified, semi-naive evaluation of validated rule sets.

The same join machinery (`solve`, `saturate`) drives both full
materialization and the delta evaluation of propagation rules; only the
store the literals read from differs.
"""
from typing import Dict, FrozenSet, Iterable, Iterator, List, Optional, Sequence, Tuple

import logging
from dataclasses import dataclass

import networkx as nx

from ..errors import NotStratifiable
from ..facts import Bound, Relation, Substitution, match_rows
from ..logic import (
    Atom,
    BuiltinEq,
    BuiltinMember,
    Constant,
    ListConstant,
    Literal,
    Negated,
    Positive,
    Predicate,
    Row,
    Rule,
    RuleSet,
    Variable,
)

logger = logging.getLogger(__name__)


class DependencyGraph:
    """
    Predicate dependency graph of a rule set.

    An edge runs from a head predicate to every predicate in the body of one
    of its rules; edge attributes `positive` and `negative` record how the
    body predicate occurs.
    """

    def __init__(self, rules: RuleSet) -> None:
        self.graph = nx.DiGraph()
        self.graph.add_nodes_from(sorted(rules.predicates()), intensional=False)
        for predicate in rules.intensional:
            self.graph.nodes[predicate]["intensional"] = True
        for rule in rules:
            for _, literal in rule.user_literals():
                head, body = rule.predicate, literal.atom.predicate
                if not self.graph.has_edge(head, body):
                    self.graph.add_edge(head, body, positive=False, negative=False)
                key = "negative" if isinstance(literal, Negated) else "positive"
                self.graph[head][body][key] = True
        self._component = {}
        self._sizes = {}
        for number, members in enumerate(nx.strongly_connected_components(self.graph)):
            self._sizes[number] = len(members)
            for predicate in members:
                self._component[predicate] = number

    def is_intensional(self, predicate: Predicate) -> bool:
        return predicate in self.graph and self.graph.nodes[predicate]["intensional"]

    def edges(self) -> List[Tuple[Predicate, Predicate, str]]:
        """(from, to, polarity) triples, sorted."""
        out = []
        for head, body, data in self.graph.edges(data=True):
            for polarity in ("positive", "negative"):
                if data[polarity]:
                    out.append((head, body, polarity))
        return sorted(out)

    def depends_on(self, predicate: Predicate, other: Predicate) -> bool:
        """True iff `other` is reachable from `predicate` by one or more edges."""
        if predicate not in self.graph or other not in self.graph:
            return False
        if predicate == other:
            return self.recursive(predicate)
        return nx.has_path(self.graph, predicate, other)

    def recursive(self, predicate: Predicate) -> bool:
        if predicate not in self._component:
            return False
        return (
            self.graph.has_edge(predicate, predicate)
            or self._sizes[self._component[predicate]] > 1
        )

    def mutually_dependent(self, predicate: Predicate, other: Predicate) -> bool:
        if predicate == other:
            return self.recursive(predicate)
        return (
            predicate in self._component
            and self._component.get(predicate) == self._component.get(other)
        )

    def dependencies(self, predicate: Predicate) -> FrozenSet[Predicate]:
        """Every predicate `predicate` transitively depends on."""
        found = set(nx.descendants(self.graph, predicate))
        if self.recursive(predicate):
            found.add(predicate)
        return frozenset(found)

    def negative_dependencies(self, predicate: Predicate) -> FrozenSet[Predicate]:
        """Dependencies reached along a path that crosses a negative edge."""
        reach = set()
        for head, body, data in self.graph.edges(data=True):
            if not data["negative"]:
                continue
            if head == predicate or self.depends_on(predicate, head):
                reach.add(body)
                reach.update(nx.descendants(self.graph, body))
        return frozenset(reach)

    def components_bottom_up(self) -> List[FrozenSet[Predicate]]:
        """Strongly connected components, dependencies before dependents."""
        condensed = nx.condensation(self.graph)
        order = list(nx.lexicographical_topological_sort(
            condensed, key=lambda c: min(condensed.nodes[c]["members"])
        ))
        return [frozenset(condensed.nodes[c]["members"]) for c in reversed(order)]


@dataclass(frozen=True)
class Stratification:
    strata: Tuple[FrozenSet[Predicate], ...] = ()

    def stratum_of(self, predicate: Predicate) -> Optional[int]:
        for number, stratum in enumerate(self.strata):
            if predicate in stratum:
                return number
        return None

    def __iter__(self):
        return iter(self.strata)

    def __len__(self) -> int:
        return len(self.strata)


def stratify(rules: RuleSet) -> Stratification:
    """
    Layer the intensional predicates so negation only looks downwards.

    Arguments:
        rules (RuleSet): Validated rules

    Returns:
        Stratification: Strata of intensional predicates, lowest first

    """
    graph = DependencyGraph(rules)
    intensional = set(rules.intensional)
    level: Dict[Predicate, int] = {}
    for component in graph.components_bottom_up():
        for head in component:
            for body in graph.graph.successors(head):
                if body in component and graph.graph[head][body]["negative"]:
                    raise NotStratifiable(sorted(component))
        component_level = 0
        for head in component:
            for body, data in graph.graph[head].items():
                if body in component or body not in intensional:
                    continue
                component_level = max(
                    component_level, level[body] + (1 if data["negative"] else 0)
                )
        for predicate in component:
            level[predicate] = component_level
    layers: Dict[int, set] = {}
    for predicate in intensional:
        layers.setdefault(level[predicate], set()).add(predicate)
    return Stratification(tuple(frozenset(layers[k]) for k in sorted(layers)))


class Store:
    """What `solve` reads from: any object with lookup and contains."""

    def lookup(self, predicate: Predicate, bound: Bound = ()) -> Iterable[Row]:
        ...

    def contains(self, predicate: Predicate, row: Row) -> bool:
        ...


class Layered(Store):
    """Reads `overlay` relations first and falls back to `base`."""

    def __init__(self, base, overlay: Dict[Predicate, Relation]) -> None:
        self.base = base
        self.overlay = overlay

    def lookup(self, predicate, bound=()):
        relation = self.overlay.get(predicate)
        if relation is not None:
            return relation.lookup(bound)
        return self.base.lookup(predicate, bound)

    def contains(self, predicate, row):
        relation = self.overlay.get(predicate)
        if relation is not None:
            return row in relation
        return self.base.contains(predicate, row)


def _value(term, binding: Substitution):
    if isinstance(term, Variable):
        return binding.get(term.name, _UNBOUND)
    if isinstance(term, Constant):
        return term.value
    return term


_UNBOUND = object()


def plan_body(body: Sequence[Literal], bound: Iterable[str] = ()) -> List[Tuple[int, Literal]]:
    """
    Order body literals for left-to-right evaluation.

    Positive atoms and member/2 generators keep their written order; tests
    (negation, =/2, member/2 over a bound element) run as soon as all their
    variables are bound.

    Arguments:
        body (Sequence[Literal]): The rule body
        bound (Iterable[str]): Variables bound before the body runs

    Returns:
        List[Tuple[int, Literal]]: (original position, literal) pairs

    """
    known = set(bound)
    pending: List[Tuple[int, Literal]] = []
    plan: List[Tuple[int, Literal]] = []

    def flush():
        for item in list(pending):
            if set(item[1].variables()) <= known:
                plan.append(item)
                pending.remove(item)

    flush()
    for position, literal in enumerate(body):
        generator = isinstance(literal, Positive) or (
            isinstance(literal, BuiltinMember) and isinstance(literal.collection, ListConstant)
        )
        if generator:
            plan.append((position, literal))
            known.update(literal.variables())
        else:
            pending.append((position, literal))
        flush()
    plan.extend(pending)
    return plan


def _bound_of(atom: Atom, binding: Substitution) -> Bound:
    bound = []
    for position, arg in enumerate(atom.args):
        value = _value(arg, binding)
        if value is not _UNBOUND:
            bound.append((position, value))
    return tuple(bound)


def _extend(atom: Atom, row: Row, binding: Substitution) -> Optional[Substitution]:
    extended = None
    for arg, value in zip(atom.args, row):
        if isinstance(arg, Variable):
            current = (extended or binding).get(arg.name, _UNBOUND)
            if current is _UNBOUND:
                if extended is None:
                    extended = dict(binding)
                extended[arg.name] = value
            elif current != value:
                return None
        elif arg.value != value:
            return None
    return binding if extended is None else extended


def ground_row(atom: Atom, binding: Substitution) -> Row:
    return tuple(_value(arg, binding) for arg in atom.args)


def solve(
    body: Sequence[Literal],
    store: Store,
    binding: Substitution = None,
    delta: Tuple[int, Relation] = None,
    plan: List[Tuple[int, Literal]] = None,
) -> Iterator[Substitution]:
    """
    Enumerate the substitutions satisfying a rule body.

    Arguments:
        body (Sequence[Literal]): Literals to satisfy
        store (Store): Where positive and negated atoms are looked up
        binding (dict: None): Variables bound on entry
        delta (Tuple[int, Relation]: None): The positive literal at this body
            position reads from the given relation instead of `store`
        plan (list: None): A precomputed plan_body result

    Returns:
        Iterator[dict]: Substitutions covering every positively bound variable

    """
    binding = dict(binding or {})
    if plan is None:
        plan = plan_body(body, binding)
    return _solve(plan, 0, binding, store, delta)


def _solve(plan, step, binding, store, delta):
    if step == len(plan):
        yield binding
        return
    position, literal = plan[step]
    if isinstance(literal, Positive):
        atom = literal.atom
        bound = _bound_of(atom, binding)
        if delta is not None and delta[0] == position:
            rows = delta[1].lookup(bound)
        else:
            rows = store.lookup(atom.predicate, bound)
        for row in rows:
            extended = _extend(atom, row, binding)
            if extended is not None:
                yield from _solve(plan, step + 1, extended, store, delta)
    elif isinstance(literal, Negated):
        if not store.contains(literal.atom.predicate, ground_row(literal.atom, binding)):
            yield from _solve(plan, step + 1, binding, store, delta)
    elif isinstance(literal, BuiltinEq):
        left, right = _value(literal.left, binding), _value(literal.right, binding)
        if (left == right) != literal.negated:
            yield from _solve(plan, step + 1, binding, store, delta)
    else:
        elements = [e.value for e in literal.collection.elements]
        element = literal.element
        value = _value(element, binding)
        if value is _UNBOUND:
            for candidate in dict.fromkeys(elements):
                yield from _solve(
                    plan, step + 1, {**binding, element.name: candidate}, store, delta
                )
        elif value in elements:
            yield from _solve(plan, step + 1, binding, store, delta)


def saturate(
    rules: Sequence[Rule],
    predicates: FrozenSet[Predicate],
    store: Store,
    target: Dict[Predicate, Relation],
) -> int:
    """
    Run rules to their fixpoint, semi-naively.

    `target` must already hold a relation for every predicate in
    `predicates`, and `store` must read those relations, so that recursive
    literals see earlier rounds.

    Arguments:
        rules (Sequence[Rule]): Rules whose heads are in `predicates`
        predicates (FrozenSet[Predicate]): The predicates being computed
        store (Store): Read access to everything the bodies mention
        target (Dict[Predicate, Relation]): Where derived rows go

    Returns:
        int: The number of rounds until no new row appeared

    """
    plans = [(rule, plan_body(rule.body)) for rule in rules]
    delta = _fire(plans, store, target, None, predicates)
    rounds = 1
    while any(delta.values()):
        for predicate, rows in delta.items():
            for row in rows:
                target[predicate].add(row)
        rounds += 1
        increments = {p: Relation(p.arity, rows) for p, rows in delta.items() if rows}
        delta = _fire(plans, store, target, increments, predicates)
    return rounds


def _fire(plans, store, target, increments, predicates):
    new: Dict[Predicate, set] = {p: set() for p in predicates}
    for rule, plan in plans:
        head = rule.head
        if increments is None:
            sources = [None]
        else:
            sources = [
                (position, increments[literal.atom.predicate])
                for position, literal in enumerate(rule.body)
                if isinstance(literal, Positive) and literal.atom.predicate in increments
            ]
        for delta in sources:
            for binding in _solve(plan, 0, {}, store, delta):
                row = ground_row(head, binding)
                if row not in target[head.predicate]:
                    new[head.predicate].add(row)
    return new


class Materialization(Store):
    """
    The derived relations of a rule set over one fact base.

    Reads of extensional predicates fall through to the base, so a
    Materialization answers for the whole program state.
    """

    def __init__(self, base, derived: Dict[Predicate, Relation], rounds=None) -> None:
        self.base = base
        self.derived = derived
        self.rounds: Dict[int, int] = dict(rounds or {})
        self._store = Layered(base, derived)

    def lookup(self, predicate, bound=()):
        return self._store.lookup(predicate, bound)

    def contains(self, predicate, row):
        return self._store.contains(predicate, row)

    def tuples(self, predicate: Predicate) -> FrozenSet[Row]:
        relation = self.derived.get(predicate)
        if relation is not None:
            return relation.rows()
        return self.base.tuples(predicate)

    def predicates(self) -> FrozenSet[Predicate]:
        return frozenset(self.derived)

    def query(self, pattern: Atom) -> List[Substitution]:
        bound = tuple(
            (i, a.value) for i, a in enumerate(pattern.args) if isinstance(a, Constant)
        )
        return match_rows(pattern, self.lookup(pattern.predicate, bound))

    def __repr__(self) -> str:
        sizes = ", ".join(f"{p}={len(r)}" for p, r in sorted(self.derived.items()))
        return f"Materialization({sizes})"


def evaluate(rules: RuleSet, base, stratification: Stratification = None) -> Materialization:
    """
    Compute the least model of a stratified program over a fact base.

    Arguments:
        rules (RuleSet): Validated, stratifiable rules
        base (Union[Snapshot, FactBase]): The extensional facts
        stratification (Stratification: None): Reuse a precomputed layering

    Returns:
        Materialization: Every intensional relation, fully computed

    """
    if stratification is None:
        stratification = stratify(rules)
    derived: Dict[Predicate, Relation] = {}
    store = Layered(base, derived)
    rounds = {}
    for number, stratum in enumerate(stratification):
        for predicate in stratum:
            derived[predicate] = Relation(predicate.arity)
        stratum_rules = [r for r in rules if r.predicate in stratum]
        rounds[number] = saturate(stratum_rules, stratum, store, derived)
        logger.debug(
            "stratum %d (%s): %d rounds",
            number,
            ", ".join(sorted(str(p) for p in stratum)),
            rounds[number],
        )
    return Materialization(base, derived, rounds)


def evaluate_query(rules: RuleSet, base, goal: Atom) -> List[Substitution]:
    """
    Answer a goal over the materialized program.

    Arguments:
        rules (RuleSet): Validated, stratifiable rules
        base (Union[Snapshot, FactBase]): The extensional facts
        goal (Atom): Constants restrict, variables are reported

    Returns:
        List[dict]: The substitutions for the goal's variables

    """
    return evaluate(rules, base).query(goal)
