"""
Deductive cohesion metrics.

A metric is a rule set over the cohesion model plus a mapping from the
derived pairs to a number. LCOM1 derives connected pairs (`cp`) and lacking
pairs (`lp`) of methods and counts the unordered lacking pairs per class.
"""
from typing import Dict, Iterator, Tuple

import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from ..engine import stratify
from ..errors import MetricInvariantError, UnknownClass
from ..logic import Predicate, RuleSet, Value, validate_ruleset, value_key
from ..model import C, CM, MODEL_PREDICATES
from ..parser import parse_rules

logger = logging.getLogger(__name__)

LCOM1_RULES = """\
% M and N access a common field of C
cp(C, M, N) :- mf(M, F), cf(C, F), mf(N, F).
% M and N are methods of C without a common field
lp(C, M, N) :- cm(C, M), cm(C, N), not(cp(C, M, N)).
"""

CP = Predicate("cp", 3)
LP = Predicate("lp", 3)

PROSE = "prose"
AS_PRINTED = "as-printed"
MAPPINGS: Dict[str, Predicate] = {PROSE: LP, AS_PRINTED: CP}


def pair_predicate(mapping: str) -> Predicate:
    """The derived predicate a mapping counts: lp for prose, cp as printed."""
    try:
        return MAPPINGS[mapping]
    except KeyError:
        raise ValueError(
            f"unknown mapping {mapping!r}, expected one of {', '.join(MAPPINGS)}"
        ) from None


@lru_cache(maxsize=None)
def lcom1_rules() -> RuleSet:
    """The cp/lp rules over c/1, cm/2, cf/2, mf/2 and mm/2."""
    return parse_rules(LCOM1_RULES, MODEL_PREDICATES)


@dataclass(frozen=True)
class Metric:
    name: str
    rules: RuleSet
    mapping: str = PROSE


METRICS = {"lcom1": Metric("lcom1", lcom1_rules())}


def get_metric(name: str) -> Metric:
    try:
        return METRICS[name]
    except KeyError:
        raise ValueError(f"unknown metric {name!r}") from None


def load_metric(path: str, mapping: str = PROSE, name: str = None) -> Metric:
    """
    Load metric rules from a rule file.

    The file may define any rules over the cohesion model, but it must define
    the pair predicate the chosen mapping counts.

    Arguments:
        path (str): A rule file
        mapping (str: "prose"): "prose" (count lp) or "as-printed" (count cp)
        name (str: None): Registry name; the file name when omitted

    Returns:
        Metric: Validated, stratifiable metric rules

    """
    with open(path) as handle:
        rules = parse_rules(handle.read(), MODEL_PREDICATES)
    validate_ruleset(rules).raise_for_violations()
    stratify(rules)
    if pair_predicate(mapping) not in rules.intensional:
        raise MetricInvariantError(f"{path} does not define {pair_predicate(mapping)}")
    return Metric(name or path, rules, mapping)


def lcom1(state, class_id: Value, mapping: str = PROSE) -> Fraction:
    """
    LCOM1 of one class.

    Arguments:
        state: A Materialization or PropagationResult holding cp/lp
        class_id: A class of the model
        mapping (str: "prose"): Which pair predicate to count

    Returns:
        Fraction: Ordered pairs with M != N, halved; always integral

    """
    if not state.contains(C, (class_id,)):
        raise UnknownClass(f"no class with id {class_id}")
    pairs = {
        (m, n) for _, m, n in state.lookup(pair_predicate(mapping), ((0, class_id),)) if m != n
    }
    value = Fraction(len(pairs), 2)
    if value.denominator != 1:
        raise MetricInvariantError(f"asymmetric pairs for class {class_id}: {value}")
    if mapping == PROSE:
        n = len(set(state.lookup(CM, ((0, class_id),))))
        if value > n * (n - 1) // 2:
            raise MetricInvariantError(
                f"lcom1({class_id}) = {value} exceeds {n * (n - 1) // 2} for {n} methods"
            )
    return value


class MetricResult:
    """Metric values per class, iterated in class id order."""

    def __init__(self, values: Dict[Value, Fraction] = None) -> None:
        self.values: Dict[Value, Fraction] = dict(
            sorted((values or {}).items(), key=lambda kv: value_key(kv[0]))
        )

    def get(self, class_id: Value, default=None):
        return self.values.get(class_id, default)

    def __getitem__(self, class_id: Value) -> Fraction:
        return self.values[class_id]

    def __contains__(self, class_id) -> bool:
        return class_id in self.values

    def __iter__(self) -> Iterator[Tuple[Value, Fraction]]:
        return iter(self.values.items())

    def __len__(self) -> int:
        return len(self.values)

    def __eq__(self, other) -> bool:
        if not isinstance(other, MetricResult):
            return NotImplemented
        return self.values == other.values

    __hash__ = None

    def lines(self) -> str:
        return "".join(f"{class_id} {value}\n" for class_id, value in self)

    def __repr__(self) -> str:
        return "MetricResult(" + ", ".join(f"{c}: {v}" for c, v in self) + ")"


def lcom1_all(state, mapping: str = PROSE) -> MetricResult:
    classes = [row[0] for row in state.lookup(C)]
    return MetricResult({c: lcom1(state, c, mapping) for c in classes})


def affected_classes(pr) -> set:
    """Classes named by any c, cm, cp or lp delta of a propagation run."""
    affected = set()
    for predicate in (C, CM, CP, LP):
        for row in pr.added(predicate) | pr.deleted(predicate):
            affected.add(row[0])
    return affected


def remap_incremental(before: MetricResult, pr, mapping: str = PROSE) -> MetricResult:
    """
    Update metric values from a propagation result.

    Arguments:
        before (MetricResult): Values over the old state
        pr (PropagationResult): A run of the transformed LCOM1 rules
        mapping (str: "prose"): Which pair predicate to count

    Returns:
        MetricResult: Values over the new state; classes outside the deltas
            keep their old value

    """
    values = dict(before.values)
    affected = affected_classes(pr)
    for class_id in affected:
        if pr.contains(C, (class_id,)):
            values[class_id] = lcom1(pr, class_id, mapping)
        else:
            values.pop(class_id, None)
    logger.debug("remapped %d of %d classes", len(affected), len(values))
    return MetricResult(values)
