"""
Refactorings as update seeds, and what-if analysis over them.

A refactoring never touches the model: `seeds_for` describes it as base
fact deltas and `whatif` propagates those deltas through the transformed
metric rules to predict the metric values afterwards.
"""
from typing import List, Optional, Tuple, Union

import logging
from dataclasses import dataclass, field
from fractions import Fraction

from ..config import DEFAULT_FRESH_PREFIX
from ..engine import Materialization, evaluate
from ..errors import (
    ClassIdInUse,
    ElementNotInClass,
    ParseError,
    TargetEqualsSource,
    UnknownClass,
)
from ..facts import DeltaSet, Relation, normalize_seeds
from ..logic import Predicate, RuleSet, Value, value_key
from ..metrics import CP, LP, PROSE, MetricResult, affected_classes, lcom1_all, remap_incremental
from ..model import C, CF, CM, CohesionModel
from ..parser import parse_constant
from ..propagation import PropagationResult, propagate
from ..transform import TransformedRuleSet

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ExistingClass:
    class_id: Value

    def __str__(self) -> str:
        return str(self.class_id)


@dataclass(frozen=True)
class NewClass:
    """A class created by the refactoring; a fresh id is drawn when `name` is None."""

    name: Optional[Value] = None

    def __str__(self) -> str:
        return "new" if self.name is None else f"new {self.name}"


Target = Union[ExistingClass, NewClass]


@dataclass(frozen=True)
class RefactoringSpec:
    element: Value
    source: Value
    target: Target

    containment: Predicate = field(default=None, init=False, repr=False, compare=False)
    command: str = field(default="", init=False, repr=False, compare=False)

    def __str__(self) -> str:
        return f"{self.command} {self.element} {self.source} -> {self.target}"


@dataclass(frozen=True)
class MoveMethod(RefactoringSpec):
    containment: Predicate = field(default=CM, init=False, repr=False, compare=False)
    command: str = field(default="move-method", init=False, repr=False, compare=False)


@dataclass(frozen=True)
class MoveField(RefactoringSpec):
    containment: Predicate = field(default=CF, init=False, repr=False, compare=False)
    command: str = field(default="move-field", init=False, repr=False, compare=False)


COMMANDS = {"move-method": MoveMethod, "move-field": MoveField}


def fresh_class_id(model: CohesionModel, prefix: str = DEFAULT_FRESH_PREFIX) -> str:
    """The reserved prefix followed by the smallest counter not yet in use."""
    used = {str(ident) for ident in model.element_ids()}
    counter = 1
    while f"{prefix}{counter}" in used:
        counter += 1
    return f"{prefix}{counter}"


def resolve_target(spec: RefactoringSpec, model: CohesionModel, prefix: str = DEFAULT_FRESH_PREFIX) -> Tuple[Value, bool]:
    """
    Find the class id a refactoring moves to.

    Returns:
        Tuple[Value, bool]: The id, and whether the class is created

    """
    if isinstance(spec.target, ExistingClass):
        if spec.target.class_id == spec.source:
            raise TargetEqualsSource(f"{spec.element} already belongs to {spec.source}")
        if spec.target.class_id not in model.classes():
            raise UnknownClass(f"no class with id {spec.target.class_id}")
        return spec.target.class_id, False
    if spec.target.name is None:
        return fresh_class_id(model, prefix), True
    if spec.target.name in model.element_ids():
        raise ClassIdInUse(f"{spec.target.name} already names a model element")
    return spec.target.name, True


def seeds_for(spec: RefactoringSpec, model: CohesionModel, prefix: str = DEFAULT_FRESH_PREFIX) -> DeltaSet:
    """
    Translate a refactoring into base fact deltas.

    Arguments:
        spec (RefactoringSpec): A move-method or move-field refactoring
        model (CohesionModel): The model it applies to
        prefix (str: "c"): Reserved prefix of fresh class ids

    Returns:
        DeltaSet: The containment fact moved, plus c(...) for a new class

    """
    if spec.source not in model.classes():
        raise UnknownClass(f"no class with id {spec.source}")
    if not model.facts.contains(spec.containment, (spec.source, spec.element)):
        raise ElementNotInClass(f"{spec.element} is not in class {spec.source}")
    target, created = resolve_target(spec, model, prefix)
    seeds = DeltaSet()
    if created:
        seeds.add_row(C, (target,))
    seeds.delete_row(spec.containment, (spec.source, spec.element))
    seeds.add_row(spec.containment, (target, spec.element))
    return seeds


@dataclass(frozen=True)
class ClassImpact:
    class_id: Value
    before: Optional[Fraction]
    after: Optional[Fraction]

    @property
    def delta(self) -> Optional[Fraction]:
        if self.before is None or self.after is None:
            return None
        return self.after - self.before

    def __str__(self) -> str:
        before = "-" if self.before is None else str(self.before)
        after = "-" if self.after is None else str(self.after)
        text = f"{self.class_id}: {before} -> {after}"
        if self.delta is not None:
            text += f" ({'+' if self.delta > 0 else ''}{self.delta})"
        return text


@dataclass
class ImpactReport:
    """The predicted effect of one refactoring. `hypothetical` until committed."""

    spec: RefactoringSpec
    impacts: Tuple[ClassImpact, ...]
    seeds: DeltaSet
    induced: DeltaSet
    after: MetricResult
    result: PropagationResult = field(default=None, repr=False)
    hypothetical: bool = True

    def render(self, show_deltas: bool = False) -> str:
        lines = [f"what-if {self.spec}"]
        lines.extend(f"  {impact}" for impact in self.impacts)
        if show_deltas:
            lines.append("seeds:")
            lines.extend(f"  {atom}" for atom in self.seeds.prefixed_atoms())
            lines.append("induced:")
            lines.extend(f"  {atom}" for atom in self.induced.prefixed_atoms())
        return "\n".join(lines) + "\n"


def whatif(
    model: CohesionModel,
    rules: RuleSet,
    transformed: TransformedRuleSet,
    spec: RefactoringSpec,
    materialization: Materialization = None,
    before: MetricResult = None,
    mapping: str = PROSE,
    prefix: str = DEFAULT_FRESH_PREFIX,
) -> ImpactReport:
    """
    Predict the metric values after a refactoring without applying it.

    Arguments:
        model (CohesionModel): The current model; left untouched
        rules (RuleSet): The metric rules
        transformed (TransformedRuleSet): transform(rules)
        spec (RefactoringSpec): The refactoring
        materialization (Materialization: None): The initial answers of
            `rules` over `model`, computed here when not given
        before (MetricResult: None): Metric values over `materialization`
        mapping (str: "prose"): Which pair predicate the metric counts
        prefix (str: "c"): Reserved prefix of fresh class ids

    Returns:
        ImpactReport: Per-class values before and after, seeds, and the
            induced cp/lp deltas

    """
    snapshot = model.snapshot()
    if materialization is None:
        materialization = evaluate(rules, snapshot)
    if before is None:
        before = lcom1_all(materialization, mapping)
    seeds, _ = normalize_seeds(snapshot, seeds_for(spec, model, prefix))
    result = propagate(transformed, snapshot, seeds, materialization)
    after = remap_incremental(before, result, mapping)
    touched = [c for c in affected_classes(result) if c in before or c in after]
    impacts = tuple(
        ClassImpact(c, before.get(c), after.get(c))
        for c in sorted(touched, key=value_key)
    )
    logger.info("what-if %s: %d classes affected", spec, len(impacts))
    return ImpactReport(
        spec=spec,
        impacts=impacts,
        seeds=seeds,
        induced=result.induced.restricted((CP, LP)),
        after=after,
        result=result,
    )


def advance(model: CohesionModel, report: ImpactReport) -> Tuple[CohesionModel, Materialization]:
    """
    Commit a report in memory.

    The new materialization is read off the propagation result instead of
    being re-evaluated.
    """
    new_model = model.apply(report.seeds)
    result = report.result
    derived = {p: Relation(p.arity, result.new_state(p)) for p in result.rules.intensional}
    return new_model, Materialization(new_model.snapshot(), derived)


def run_batch(
    model: CohesionModel,
    rules: RuleSet,
    transformed: TransformedRuleSet,
    specs: List[RefactoringSpec],
    chain: bool = False,
    mapping: str = PROSE,
    prefix: str = DEFAULT_FRESH_PREFIX,
) -> List[ImpactReport]:
    """
    Run several what-ifs.

    Without `chain` every refactoring is judged against the given model;
    with it, each one is committed in memory before the next is analysed.
    """
    materialization = evaluate(rules, model.snapshot())
    before = lcom1_all(materialization, mapping)
    reports = []
    for spec in specs:
        report = whatif(model, rules, transformed, spec, materialization, before, mapping, prefix)
        reports.append(report)
        if chain:
            model, materialization = advance(model, report)
            before = report.after
    return reports


def _parse_target(tokens: List[str], line: int) -> Target:
    if tokens and tokens[0] == "new":
        if len(tokens) == 1:
            return NewClass()
        if len(tokens) == 2:
            return NewClass(parse_constant(tokens[1]))
    elif len(tokens) == 1:
        return ExistingClass(parse_constant(tokens[0]))
    raise ParseError(f"malformed refactoring target {' '.join(tokens)!r} (line {line})")


def parse_command(text: str, line: int = 1) -> RefactoringSpec:
    """
    Read a one-line refactoring command.

    Arguments:
        text (str): `move-method <m> <from> -> <to>` or
            `move-field <f> <from> -> new [<id>]`
        line (int: 1): Line number used in error messages

    Returns:
        RefactoringSpec: The parsed refactoring

    """
    head, arrow, tail = text.partition("->")
    tokens = head.split()
    if not arrow or len(tokens) != 3 or tokens[0] not in COMMANDS:
        raise ParseError(f"malformed refactoring command {text.strip()!r} (line {line})")
    command, element, source = tokens
    return COMMANDS[command](
        parse_constant(element), parse_constant(source), _parse_target(tail.split(), line)
    )


def parse_batch(text: str) -> List[RefactoringSpec]:
    """Refactoring commands, one per line; blank lines and % comments are skipped."""
    specs = []
    for number, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.split("%", 1)[0].strip()
        if stripped:
            specs.append(parse_command(stripped, number))
    return specs
