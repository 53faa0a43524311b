"""
Update propagation rule generation.

The Rule Analyser (`analyse_rules`) collects meta information about a
validated rule set; the generator turns each source clause into insertion
and deletion propagation rules and adds direct (`nwd_`) and indirect
(`nwi_`) transition rules. Rules are built as structured values and only
rendered for display.
"""
from typing import Dict, FrozenSet, List, Tuple

import logging
from dataclasses import dataclass, field, replace
from enum import Enum

from ..engine import DependencyGraph, stratify
from ..errors import ReservedPredicateName
from ..logic import (
    Atom,
    Literal,
    Negated,
    Positive,
    Predicate,
    Rule,
    RuleSet,
    Variable,
    render_rule,
    validate_ruleset,
)

logger = logging.getLogger(__name__)

ADD, DEL, NWD, NWI = "add", "del", "nwd", "nwi"
PREFIXES = (ADD, DEL, NWD, NWI)


def prefixed(prefix: str, predicate: Predicate) -> Predicate:
    return Predicate(f"{prefix}_{predicate.name}", predicate.arity)


def _prefixed_atom(prefix: str, atom: Atom) -> Atom:
    return atom.renamed(f"{prefix}_{atom.name}")


class StateKind(Enum):
    NWD = NWD
    NWI = NWI


@dataclass(frozen=True)
class TransformOptions:
    """
    Arguments:
        effectiveness_tests (bool: True): Append the trailing `not(...)` state
            test to every propagation rule. Dropping it is only sound when no
            fact has alternative derivations.
    """

    effectiveness_tests: bool = True


@dataclass(frozen=True)
class HeadOfRule:
    rule_id: str
    head: Atom
    predicate: Predicate


@dataclass(frozen=True)
class BodyPredicateOfRule:
    rule_id: str
    body_id: str
    position: int
    literal: Literal
    polarity: str


@dataclass(frozen=True)
class RuleVariables:
    rule_id: str
    body_id: str
    variables: Tuple[str, ...]
    shared_with_head: Tuple[str, ...]


@dataclass(frozen=True)
class RuleMeta:
    """Meta information about a rule set, as collected by analyse_rules."""

    heads: Tuple[HeadOfRule, ...]
    body: Tuple[BodyPredicateOfRule, ...]
    variables: Tuple[RuleVariables, ...]
    closure: Dict[Predicate, FrozenSet[Predicate]]
    negative_closure: Dict[Predicate, FrozenSet[Predicate]]
    free_head_variables: Dict[str, Tuple[str, ...]]
    free_body_variables: Dict[str, Tuple[str, ...]]
    self_referencing: FrozenSet[str]
    graph: DependencyGraph = field(repr=False, compare=False)

    def head_of(self, rule_id: str) -> HeadOfRule:
        return next(h for h in self.heads if h.rule_id == rule_id)

    def body_of(self, rule_id: str) -> Tuple[BodyPredicateOfRule, ...]:
        return tuple(b for b in self.body if b.rule_id == rule_id)

    def mutually_dependent(self, predicate: Predicate, other: Predicate) -> bool:
        return other in self.closure.get(predicate, ()) and predicate in self.closure.get(
            other, ()
        )


def _polarity(literal: Literal) -> str:
    if isinstance(literal, Positive):
        return "positive"
    if isinstance(literal, Negated):
        return "negative"
    return "builtin"


def analyse_rules(rules: RuleSet) -> RuleMeta:
    """
    Collect meta information about a validated rule set.

    Arguments:
        rules (RuleSet): Validated rules

    Returns:
        RuleMeta: Heads, body literals (1-based positions), variable
            occurrences, and the transitive dependency closure

    """
    graph = DependencyGraph(rules)
    heads, body, variables = [], [], []
    free_head, free_body, self_referencing = {}, {}, set()
    for rule in rules:
        heads.append(HeadOfRule(rule.id, rule.head, rule.predicate))
        head_vars = rule.head.variables()
        body_vars = []
        for position, literal in enumerate(rule.body, start=1):
            body_id = f"{rule.id}/{position}"
            body.append(BodyPredicateOfRule(rule.id, body_id, position, literal, _polarity(literal)))
            names = literal.variables()
            variables.append(RuleVariables(
                rule.id, body_id, names, tuple(v for v in names if v in head_vars)
            ))
            body_vars.extend(v for v in names if v not in body_vars)
            if literal.is_user and literal.atom.predicate == rule.predicate:
                self_referencing.add(rule.id)
        free_head[rule.id] = tuple(v for v in head_vars if v not in body_vars)
        free_body[rule.id] = tuple(v for v in body_vars if v not in head_vars)
    predicates = sorted(rules.predicates())
    return RuleMeta(
        heads=tuple(heads),
        body=tuple(body),
        variables=tuple(variables),
        closure={p: graph.dependencies(p) for p in predicates},
        negative_closure={p: graph.negative_dependencies(p) for p in predicates},
        free_head_variables=free_head,
        free_body_variables=free_body,
        self_referencing=frozenset(self_referencing),
        graph=graph,
    )


def select_state(
    predicate: Predicate,
    context: Predicate,
    graph: DependencyGraph,
    negated: bool = False,
) -> StateKind:
    """
    Choose the new-state relation a generated body reads for `predicate`.

    Arguments:
        predicate (Predicate): The body predicate
        context (Predicate): The head of the clause the literal sits in
        graph (DependencyGraph): Dependencies of the source rule set
        negated (bool: False): Whether the literal is negated in the clause

    Returns:
        StateKind: NWI for an intensional predicate under negation or
            mutually dependent with the head; NWD otherwise

    """
    if not graph.is_intensional(predicate):
        return StateKind.NWD
    if negated or graph.mutually_dependent(predicate, context):
        return StateKind.NWI
    return StateKind.NWD


def _new_state_literal(literal: Literal, context: Predicate, graph: DependencyGraph) -> Literal:
    if isinstance(literal, Positive):
        kind = select_state(literal.atom.predicate, context, graph)
        return Positive(_prefixed_atom(kind.value, literal.atom))
    if isinstance(literal, Negated):
        kind = select_state(literal.atom.predicate, context, graph, negated=True)
        return Negated(_prefixed_atom(kind.value, literal.atom))
    return literal


def generate_propagation_rules(
    rule: Rule, meta: RuleMeta, options: TransformOptions = TransformOptions()
) -> List[Rule]:
    """
    Derive the insertion and deletion propagation rules of one clause.

    For every positive or negated body literal there is one insertion rule
    (`add_H`, other literals in the new state, effectiveness test against the
    old head) and one deletion rule (`del_H`, other literals in the old state,
    effectiveness test against `nwi_H`). The delta literal always comes first.

    Arguments:
        rule (Rule): A validated source clause
        meta (RuleMeta): Meta information covering the clause
        options (TransformOptions): Generation switches

    Returns:
        List[Rule]: Insertion rules in body order, then deletion rules

    """
    graph = meta.graph
    head = rule.head
    insertions, deletions = [], []
    for index, literal in rule.user_literals():
        inserted = ADD if isinstance(literal, Positive) else DEL
        removed = DEL if isinstance(literal, Positive) else ADD
        rest = [lit for i, lit in enumerate(rule.body) if i != index]

        body = [Positive(_prefixed_atom(inserted, literal.atom))]
        body.extend(_new_state_literal(lit, rule.predicate, graph) for lit in rest)
        if options.effectiveness_tests:
            body.append(Negated(head))
        insertions.append(Rule(
            _prefixed_atom(ADD, head), tuple(body), f"{ADD}_{rule.id}_{index + 1}"
        ))

        body = [Positive(_prefixed_atom(removed, literal.atom))]
        body.extend(rest)
        if options.effectiveness_tests:
            body.append(Negated(_prefixed_atom(NWI, head)))
        deletions.append(Rule(
            _prefixed_atom(DEL, head), tuple(body), f"{DEL}_{rule.id}_{index + 1}"
        ))
    return insertions + deletions


def _pattern_variables(predicate: Predicate, rules: RuleSet) -> Tuple[Variable, ...]:
    """Readable argument variables for a generated nwd_ clause."""
    candidates = [r.head for r in rules.rules_for(predicate)]
    for rule in rules:
        candidates.extend(lit.atom for _, lit in rule.user_literals() if lit.atom.predicate == predicate)
    for atom in candidates:
        names = [a.name for a in atom.args if isinstance(a, Variable)]
        if len(names) == predicate.arity and len(set(names)) == len(names) and not any(
            n.startswith("_") for n in names
        ):
            return tuple(Variable(n) for n in names)
    return tuple(Variable(f"X{i}") for i in range(1, predicate.arity + 1))


def _direct_rules(predicate: Predicate, rules: RuleSet) -> List[Rule]:
    atom = Atom(predicate.name, _pattern_variables(predicate, rules))
    new = _prefixed_atom(NWD, atom)
    return [
        Rule(new, (Positive(atom), Negated(_prefixed_atom(DEL, atom))), f"{NWD}_{predicate}_1"),
        Rule(new, (Positive(_prefixed_atom(ADD, atom)),), f"{NWD}_{predicate}_2"),
    ]


def generate_transition_rules(rules: RuleSet, meta: RuleMeta) -> Tuple[List[Rule], List[Rule]]:
    """
    Derive direct and indirect transition rules.

    Arguments:
        rules (RuleSet): The validated source rules
        meta (RuleMeta): Their meta information

    Returns:
        Tuple[List[Rule], List[Rule]]: Direct rules (`nwd_`, every predicate:
            intensional in definition order, then base predicates sorted) and
            indirect rules (`nwi_`, one per intensional source clause)

    """
    predicates = list(rules.intensional) + sorted(rules.base_predicates())
    direct = []
    for predicate in predicates:
        direct.extend(_direct_rules(predicate, rules))
    indirect = []
    for rule in rules:
        body = tuple(_new_state_literal(lit, rule.predicate, meta.graph) for lit in rule.body)
        indirect.append(Rule(_prefixed_atom(NWI, rule.head), body, f"{NWI}_{rule.id}"))
    return direct, indirect


@dataclass(frozen=True)
class PropagationSchedule:
    """
    Evaluation order of a generated program.

    `delta_components` lists the add_/del_ heads of intensional predicates
    grouped by strongly connected component, dependencies first.
    `recursive_states` maps every recursive nwi_ predicate to its component;
    those are saturated as a whole instead of being probed top-down.
    """

    delta_components: Tuple[FrozenSet[Predicate], ...] = ()
    recursive_states: Dict[Predicate, FrozenSet[Predicate]] = field(default_factory=dict)


@dataclass(frozen=True)
class TransformedRuleSet:
    """The generated update propagation program of a source rule set."""

    propagation_rules: Tuple[Rule, ...]
    direct_transition_rules: Tuple[Rule, ...]
    indirect_transition_rules: Tuple[Rule, ...]
    source: RuleSet
    options: TransformOptions
    meta: RuleMeta = field(repr=False, compare=False)
    schedule: PropagationSchedule = field(default=None, repr=False, compare=False)

    @property
    def graph(self) -> DependencyGraph:
        return self.meta.graph

    def generated_rules(self) -> Tuple[Rule, ...]:
        return self.propagation_rules + self.indirect_transition_rules + self.direct_transition_rules

    def seed_predicates(self) -> FrozenSet[Predicate]:
        """The add_/del_ predicates of the base predicates."""
        return frozenset(
            prefixed(prefix, p) for p in self.source.base_predicates() for prefix in (ADD, DEL)
        )

    def as_ruleset(self) -> RuleSet:
        """
        The augmented program: source rules plus every generated rule.

        Base predicates and their seed delta predicates are extensional.
        """
        return RuleSet(
            self.source.rules + self.generated_rules(),
            self.source.base_predicates() | self.seed_predicates(),
        )

    def rules_for(self, predicate: Predicate) -> Tuple[Rule, ...]:
        return tuple(r for r in self.generated_rules() if r.predicate == predicate)


def _check_names(rules: RuleSet) -> None:
    existing = {p.name for p in rules.predicates()}
    for predicate in rules.predicates():
        for prefix in PREFIXES:
            name = f"{prefix}_{predicate.name}"
            if name in existing:
                raise ReservedPredicateName(
                    f"{name} is generated for {predicate} but already names a predicate"
                )


def transform(rules: RuleSet, options: TransformOptions = TransformOptions()) -> TransformedRuleSet:
    """
    Generate the update propagation program for a rule set.

    Arguments:
        rules (RuleSet): Source rules; validated and stratified here
        options (TransformOptions): Generation switches

    Returns:
        TransformedRuleSet: Propagation, direct and indirect transition rules

    """
    validate_ruleset(rules).raise_for_violations()
    stratify(rules)
    _check_names(rules)
    meta = analyse_rules(rules)
    propagation = []
    for predicate in rules.intensional:
        clauses = [generate_propagation_rules(r, meta, options) for r in rules.rules_for(predicate)]
        for generated in clauses:
            propagation.extend(r for r in generated if r.head.name.startswith(ADD + "_"))
        for generated in clauses:
            propagation.extend(r for r in generated if r.head.name.startswith(DEL + "_"))
    direct, indirect = generate_transition_rules(rules, meta)
    logger.debug(
        "generated %d propagation, %d direct and %d indirect transition rules",
        len(propagation), len(direct), len(indirect),
    )
    transformed = TransformedRuleSet(
        tuple(propagation), tuple(direct), tuple(indirect), rules, options, meta
    )
    return replace(transformed, schedule=_schedule(transformed))


def _schedule(transformed: TransformedRuleSet) -> PropagationSchedule:
    augmented = transformed.as_ruleset()
    stratify(augmented)
    graph = DependencyGraph(augmented)
    intensional = transformed.source.intensional
    delta_heads = {prefixed(p, q) for q in intensional for p in (ADD, DEL)}
    state_heads = {prefixed(NWI, q) for q in intensional}
    components, recursive = [], {}
    for component in graph.components_bottom_up():
        if component & delta_heads:
            components.append(frozenset(component & delta_heads))
        states = component & state_heads
        if states and (len(component) > 1 or any(graph.recursive(p) for p in states)):
            for predicate in states:
                recursive[predicate] = frozenset(states)
    return PropagationSchedule(tuple(components), recursive)


def render_transformed(transformed: TransformedRuleSet) -> str:
    """
    Render the generated program in rule-file syntax.

    Rules are grouped per intensional predicate (add_, del_, nwi_, nwd_), in
    definition order, followed by the nwd_ rules of the base predicates.
    """
    sections = []
    for predicate in transformed.source.intensional:
        heads = [prefixed(p, predicate) for p in (ADD, DEL, NWI, NWD)]
        lines = [f"% {predicate}"]
        for head in heads:
            lines.extend(render_rule(r) for r in transformed.rules_for(head))
        sections.append("\n".join(lines))
    for predicate in sorted(transformed.source.base_predicates()):
        lines = [f"% {predicate}"]
        lines.extend(render_rule(r) for r in transformed.rules_for(prefixed(NWD, predicate)))
        sections.append("\n".join(lines))
    return "\n\n".join(sections) + "\n"
