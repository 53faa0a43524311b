"""
The restricted deductive rule language.

Terms are variables, constants (identifiers, quoted strings or integers) and
ground list constants. Rule heads are flat atoms; bodies hold positive and
negated atoms plus the built-ins `=/2` (and its negation) and `member/2`.
"""
from typing import Dict, FrozenSet, Iterable, List, NamedTuple, Tuple, Union

import re
from dataclasses import dataclass, field, replace
from enum import Enum

from ..errors import InvalidRuleSet

Value = Union[int, str]
Row = Tuple[Value, ...]

BUILTINS = frozenset({("=", 2), ("member", 2), ("not", 1)})

_IDENTIFIER = re.compile(r"[a-z][a-zA-Z0-9_]*\Z")
_KEYWORDS = frozenset({"not"})


class Predicate(NamedTuple):
    name: str
    arity: int

    def __str__(self) -> str:
        return f"{self.name}/{self.arity}"


def value_key(value: Value):
    """Total order on constants: integers first, then identifiers."""
    return (0, value, "") if isinstance(value, int) else (1, 0, value)


def row_key(row: Row):
    return tuple(value_key(v) for v in row)


def sorted_rows(rows: Iterable[Row]) -> List[Row]:
    return sorted(rows, key=row_key)


def render_value(value: Value) -> str:
    """
    Render a constant so that the parser reads it back unchanged.

    Arguments:
        value (Union[int, str]): The constant

    Returns:
        str: Bare identifier, integer literal, or single-quoted string

    """
    if isinstance(value, int):
        return str(value)
    if _IDENTIFIER.match(value) and value not in _KEYWORDS:
        return value
    escaped = value.replace("\\", "\\\\").replace("'", "\\'")
    return f"'{escaped}'"


@dataclass(frozen=True)
class Variable:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Constant:
    value: Value

    def __str__(self) -> str:
        return render_value(self.value)


@dataclass(frozen=True)
class ListConstant:
    elements: Tuple[Constant, ...]

    def __str__(self) -> str:
        return "[" + ", ".join(str(e) for e in self.elements) + "]"


Term = Union[Variable, Constant, ListConstant]


@dataclass(frozen=True)
class Atom:
    name: str
    args: Tuple[Term, ...] = ()

    @property
    def predicate(self) -> Predicate:
        return Predicate(self.name, len(self.args))

    def variables(self) -> Tuple[str, ...]:
        """Variable names in order of first occurrence."""
        seen = []
        for arg in self.args:
            if isinstance(arg, Variable) and arg.name not in seen:
                seen.append(arg.name)
        return tuple(seen)

    def is_ground(self) -> bool:
        return not any(isinstance(a, Variable) for a in self.args)

    def is_flat(self) -> bool:
        return all(isinstance(a, (Variable, Constant)) for a in self.args)

    def row(self) -> Row:
        """The value tuple of a ground, flat atom."""
        return tuple(a.value for a in self.args)

    def renamed(self, name: str) -> "Atom":
        return Atom(name, self.args)

    @classmethod
    def from_row(cls, predicate: Predicate, row: Row) -> "Atom":
        return cls(predicate.name, tuple(Constant(v) for v in row))

    def __str__(self) -> str:
        if not self.args:
            return self.name
        return f"{self.name}(" + ", ".join(str(a) for a in self.args) + ")"


class Literal:
    """Common base of body literals."""

    def variables(self) -> Tuple[str, ...]:
        ...

    @property
    def is_user(self) -> bool:
        return False


@dataclass(frozen=True)
class Positive(Literal):
    atom: Atom

    def variables(self):
        return self.atom.variables()

    @property
    def is_user(self) -> bool:
        return True

    def __str__(self) -> str:
        return str(self.atom)


@dataclass(frozen=True)
class Negated(Literal):
    atom: Atom

    def variables(self):
        return self.atom.variables()

    @property
    def is_user(self) -> bool:
        return True

    def __str__(self) -> str:
        return f"not({self.atom})"


def _term_variables(*terms: Term) -> Tuple[str, ...]:
    seen = []
    for term in terms:
        if isinstance(term, Variable) and term.name not in seen:
            seen.append(term.name)
    return tuple(seen)


@dataclass(frozen=True)
class BuiltinEq(Literal):
    """`L = R`, or `not(L = R)` when negated."""

    left: Term
    right: Term
    negated: bool = False

    def variables(self):
        return _term_variables(self.left, self.right)

    def __str__(self) -> str:
        text = f"{self.left} = {self.right}"
        return f"not({text})" if self.negated else text


@dataclass(frozen=True)
class BuiltinMember(Literal):
    element: Term
    collection: Term

    def variables(self):
        return _term_variables(self.element, self.collection)

    def __str__(self) -> str:
        return f"member({self.element}, {self.collection})"


@dataclass(frozen=True)
class Rule:
    head: Atom
    body: Tuple[Literal, ...] = ()
    id: str = field(default="", compare=False)

    @property
    def predicate(self) -> Predicate:
        return self.head.predicate

    def user_literals(self) -> List[Tuple[int, Literal]]:
        """(index, literal) of every positive or negated body literal."""
        return [(i, lit) for i, lit in enumerate(self.body) if lit.is_user]

    def body_predicates(self) -> List[Predicate]:
        return [lit.atom.predicate for _, lit in self.user_literals()]

    def variables(self) -> Tuple[str, ...]:
        seen = list(self.head.variables())
        for literal in self.body:
            for name in literal.variables():
                if name not in seen:
                    seen.append(name)
        return tuple(seen)

    def __str__(self) -> str:
        return render_rule(self)


def render_atom(atom: Atom) -> str:
    return str(atom)


def render_rule(rule: Rule) -> str:
    """
    Render a rule in the rule-file syntax.

    Arguments:
        rule (Rule): The rule to render

    Returns:
        str: One clause, terminated by a period

    """
    if not rule.body:
        return f"{rule.head}."
    return f"{rule.head} :- " + ", ".join(str(lit) for lit in rule.body) + "."


def _rename_term(term: Term, mapping: Dict[str, str]) -> Term:
    if isinstance(term, Variable):
        if term.name not in mapping:
            mapping[term.name] = f"V{len(mapping)}"
        return Variable(mapping[term.name])
    return term


def _rename_atom(atom: Atom, mapping: Dict[str, str]) -> Atom:
    return Atom(atom.name, tuple(_rename_term(a, mapping) for a in atom.args))


def _rename_literal(literal: Literal, mapping: Dict[str, str]) -> Literal:
    if isinstance(literal, Positive):
        return Positive(_rename_atom(literal.atom, mapping))
    if isinstance(literal, Negated):
        return Negated(_rename_atom(literal.atom, mapping))
    if isinstance(literal, BuiltinEq):
        return BuiltinEq(
            _rename_term(literal.left, mapping),
            _rename_term(literal.right, mapping),
            literal.negated,
        )
    return BuiltinMember(
        _rename_term(literal.element, mapping),
        _rename_term(literal.collection, mapping),
    )


def canonical_rule(rule: Rule) -> Rule:
    """
    Rename variables to V0, V1, ... by first occurrence (head, then body).

    Two rules are equal up to variable renaming iff their canonical forms are
    equal.
    """
    mapping: Dict[str, str] = {}
    head = _rename_atom(rule.head, mapping)
    body = tuple(_rename_literal(lit, mapping) for lit in rule.body)
    return Rule(head, body, rule.id)


class RuleSet:
    """
    An ordered collection of rules plus the set of extensional predicates.

    Rules without an id are numbered per head predicate (`cp_1`, `cp_2`, ...).
    """

    def __init__(self, rules: Iterable[Rule] = (), extensional: Iterable = ()) -> None:
        counters: Dict[str, int] = {}
        numbered = []
        used = set()
        for rule in rules:
            counters[rule.head.name] = counters.get(rule.head.name, 0) + 1
            if not rule.id:
                rule = replace(rule, id=f"{rule.head.name}_{counters[rule.head.name]}")
            if rule.id in used:
                raise ValueError(f"duplicate rule id {rule.id}")
            used.add(rule.id)
            numbered.append(rule)
        self.rules: Tuple[Rule, ...] = tuple(numbered)
        self.extensional: FrozenSet[Predicate] = frozenset(
            Predicate(*p) for p in extensional
        )
        clash = self.extensional & set(self.intensional)
        if clash:
            names = ", ".join(sorted(str(p) for p in clash))
            raise ValueError(f"predicates both extensional and defined by rules: {names}")

    @property
    def intensional(self) -> Tuple[Predicate, ...]:
        """Rule-defined predicates in order of first definition."""
        seen = []
        for rule in self.rules:
            if rule.predicate not in seen:
                seen.append(rule.predicate)
        return tuple(seen)

    def base_predicates(self) -> FrozenSet[Predicate]:
        """Declared extensional predicates plus undefined body predicates."""
        defined = set(self.intensional)
        found = set(self.extensional)
        for rule in self.rules:
            found.update(p for p in rule.body_predicates() if p not in defined)
        return frozenset(found)

    def predicates(self) -> FrozenSet[Predicate]:
        return self.base_predicates() | frozenset(self.intensional)

    def rules_for(self, predicate: Predicate) -> Tuple[Rule, ...]:
        return tuple(r for r in self.rules if r.predicate == predicate)

    def __iter__(self):
        return iter(self.rules)

    def __len__(self) -> int:
        return len(self.rules)

    def __eq__(self, other) -> bool:
        if not isinstance(other, RuleSet):
            return NotImplemented
        return self.rules == other.rules and self.extensional == other.extensional

    def __repr__(self) -> str:
        return f"RuleSet({len(self.rules)} rules, extensional={sorted(map(str, self.extensional))})"


def render_ruleset(rules: Iterable[Rule]) -> str:
    return "".join(render_rule(r) + "\n" for r in rules)


class ViolationKind(Enum):
    DISALLOWED_PREDICATE = "DisallowedPredicate"
    COMPLEX_HEAD_TERM = "ComplexHeadTerm"
    UNSAFE_VARIABLE = "UnsafeVariable"
    NON_GROUND_LIST = "NonGroundList"


@dataclass(frozen=True)
class Violation:
    kind: ViolationKind
    rule_id: str
    detail: str

    def __str__(self) -> str:
        return f"{self.kind.value} in {self.rule_id}: {self.detail}"


@dataclass(frozen=True)
class ValidationReport:
    violations: Tuple[Violation, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def kinds(self) -> FrozenSet[ViolationKind]:
        return frozenset(v.kind for v in self.violations)

    def raise_for_violations(self) -> None:
        if self.violations:
            raise InvalidRuleSet(self)

    def __bool__(self) -> bool:
        return self.ok

    def __str__(self) -> str:
        if self.ok:
            return "OK"
        return "; ".join(str(v) for v in self.violations)


def positively_bound(body: Iterable[Literal]) -> FrozenSet[str]:
    """Variables bound by positive atoms or by member/2 over a list constant."""
    bound = set()
    for literal in body:
        if isinstance(literal, Positive):
            bound.update(literal.variables())
        elif isinstance(literal, BuiltinMember) and isinstance(
            literal.collection, ListConstant
        ):
            bound.update(_term_variables(literal.element))
    return frozenset(bound)


def validate_ruleset(rules: RuleSet, allowed: Iterable = ()) -> ValidationReport:
    """
    Check a rule set against the allowed syntax.

    Body predicates must be extensional (`allowed` or declared), defined by
    the rule set, or one of the built-ins. Heads must be flat and every rule
    range restricted. Never raises.

    Arguments:
        rules (RuleSet): The rules to check
        allowed (Iterable[Predicate]): Additional permitted base predicates

    Returns:
        ValidationReport: Every violation found, in rule order

    """
    permitted = (
        set(Predicate(*p) for p in allowed) | set(rules.extensional) | set(rules.intensional)
    )
    violations = []
    for rule in rules:
        if not rule.head.is_flat():
            violations.append(
                Violation(ViolationKind.COMPLEX_HEAD_TERM, rule.id, str(rule.head))
            )
        for _, literal in rule.user_literals():
            predicate = literal.atom.predicate
            if predicate not in permitted or (predicate.name, predicate.arity) in BUILTINS:
                violations.append(
                    Violation(ViolationKind.DISALLOWED_PREDICATE, rule.id, str(predicate))
                )
        for literal in rule.body:
            if isinstance(literal, BuiltinMember) and not isinstance(
                literal.collection, ListConstant
            ):
                violations.append(
                    Violation(ViolationKind.NON_GROUND_LIST, rule.id, str(literal))
                )
        bound = positively_bound(rule.body)
        unsafe = [v for v in rule.head.variables() if v not in bound]
        for literal in rule.body:
            if isinstance(literal, Positive):
                continue
            if isinstance(literal, BuiltinMember) and isinstance(
                literal.collection, ListConstant
            ):
                continue
            unsafe.extend(v for v in literal.variables() if v not in bound)
        for name in dict.fromkeys(unsafe):
            violations.append(Violation(ViolationKind.UNSAFE_VARIABLE, rule.id, name))
    return ValidationReport(tuple(violations))
