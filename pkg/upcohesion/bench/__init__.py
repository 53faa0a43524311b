"""
Incremental propagation against full recomputation, on synthetic models.

Model generation: every class gets `methods` methods and `fields` fields;
each method accesses each field of its own class with probability
`density`, makes `fields` attempts at `density / 4` to access a random field
of another class, and calls a random method of its own class with
probability `density`. Everything is drawn from one seeded RNG, so a
parameter set and seed always yield the same model and the same updates.
"""
from typing import Callable, Dict, List

import logging
import random
import statistics
import time
from dataclasses import asdict, dataclass, field

from joblib import Parallel, delayed

from ..engine import Materialization, evaluate
from ..errors import BenchParameterError, MismatchDetected
from ..facts import FactBase, apply_delta_set, normalize_seeds
from ..logic import RuleSet
from ..metrics import CP, LP, PROSE, MetricResult, lcom1_all, lcom1_rules, remap_incremental
from ..model import C, CF, CM, MF, MM, CohesionModel
from ..propagation import propagate
from ..refactoring import (
    ExistingClass,
    MoveField,
    MoveMethod,
    NewClass,
    RefactoringSpec,
    seeds_for,
)
from ..statusmonitor import NullStatusMonitor
from ..transform import TransformedRuleSet, transform

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class BenchParams:
    classes: int = 200
    methods: int = 10
    fields: int = 10
    density: float = 0.3
    updates: int = 20
    seed: int = 0

    def validate(self) -> "BenchParams":
        for name in ("classes", "methods", "fields"):
            if getattr(self, name) < 1:
                raise BenchParameterError(f"{name} must be positive, got {getattr(self, name)}")
        if self.updates < 0:
            raise BenchParameterError(f"updates must not be negative, got {self.updates}")
        if not 0.0 <= self.density <= 1.0:
            raise BenchParameterError(f"density must be in [0, 1], got {self.density}")
        return self


def generate_model(params: BenchParams, rng: random.Random) -> CohesionModel:
    """
    Build a synthetic cohesion model.

    Arguments:
        params (BenchParams): Model size and access density
        rng (random.Random): The only source of randomness

    Returns:
        CohesionModel: Classes c1.., methods m<i>_<j>, fields f<i>_<k>

    """
    facts = FactBase()
    classes = [f"c{i}" for i in range(1, params.classes + 1)]
    methods = {c: [f"m{i}_{j}" for j in range(1, params.methods + 1)] for i, c in enumerate(classes, 1)}
    fields_ = {c: [f"f{i}_{k}" for k in range(1, params.fields + 1)] for i, c in enumerate(classes, 1)}
    for class_id in classes:
        facts.add_row(C, (class_id,))
        for method in methods[class_id]:
            facts.add_row(CM, (class_id, method))
        for fld in fields_[class_id]:
            facts.add_row(CF, (class_id, fld))
    for class_id in classes:
        others = [c for c in classes if c != class_id]
        for method in methods[class_id]:
            for fld in fields_[class_id]:
                if rng.random() < params.density:
                    facts.add_row(MF, (method, fld))
            for _ in range(params.fields):
                if others and rng.random() < params.density / 4:
                    facts.add_row(MF, (method, rng.choice(fields_[rng.choice(others)])))
            if rng.random() < params.density:
                facts.add_row(MM, (method, rng.choice(methods[class_id])))
    return CohesionModel(facts)


def random_refactoring(model: CohesionModel, rng: random.Random) -> RefactoringSpec:
    """A random move-method or move-field, to a new class half of the time."""
    classes = sorted(model.classes())
    kind = rng.choice((MoveMethod, MoveField))
    owned = model.methods_of if kind is MoveMethod else model.fields_of
    candidates = [c for c in classes if owned(c)]
    if not candidates:
        kind = MoveField if kind is MoveMethod else MoveMethod
        owned = model.methods_of if kind is MoveMethod else model.fields_of
        candidates = [c for c in classes if owned(c)]
    source = rng.choice(candidates)
    element = rng.choice(owned(source))
    others = [c for c in classes if c != source]
    if not others or rng.random() < 0.5:
        target = NewClass()
    else:
        target = ExistingClass(rng.choice(others))
    return kind(element, source, target)


@dataclass
class Trial:
    index: int
    seed: int
    refactoring: str
    t_incremental_ns: int
    t_full_ns: int
    equal: bool

    @property
    def speedup(self) -> float:
        return self.t_full_ns / max(self.t_incremental_ns, 1)


@dataclass
class BenchReport:
    params: BenchParams
    trials: List[Trial] = field(default_factory=list)

    @property
    def equal(self) -> bool:
        return all(t.equal for t in self.trials)

    @property
    def speedup(self) -> float:
        """Median of the per-trial full / incremental time ratios; 0 without trials."""
        if not self.trials:
            return 0.0
        return statistics.median(t.speedup for t in self.trials)

    def to_json(self) -> Dict:
        return {
            "classes": self.params.classes,
            "methods_per_class": self.params.methods,
            "fields_per_class": self.params.fields,
            "density": self.params.density,
            "updates": self.params.updates,
            "seed": self.params.seed,
            "trials": [asdict(t) for t in self.trials],
            "speedup": self.speedup,
            "equal": self.equal,
        }

    def render(self) -> str:
        p = self.params
        lines = [
            f"bench: {p.classes} classes x {p.methods} methods x {p.fields} fields, "
            f"density {p.density}, {p.updates} updates, seed {p.seed}"
        ]
        for t in self.trials:
            lines.append(
                f"  #{t.index:<3} {t.refactoring:<36} incremental {t.t_incremental_ns / 1e6:9.3f} ms"
                f"  full {t.t_full_ns / 1e6:9.3f} ms  {'equal' if t.equal else 'MISMATCH'}"
            )
        lines.append(f"median speedup: {self.speedup:.2f}x")
        lines.append(f"verdict: {'equal' if self.equal else 'mismatch'}")
        return "\n".join(lines) + "\n"


def run_trial(
    index: int,
    seed: int,
    model: CohesionModel,
    rules: RuleSet,
    transformed: TransformedRuleSet,
    materialization: Materialization,
    before: MetricResult,
    mapping: str = PROSE,
) -> Dict:
    """
    Time one random refactoring both ways and compare the outcomes.

    Returns:
        dict: The Trial, plus the reproduction data when the paths disagree

    """
    rng = random.Random(seed)
    spec = random_refactoring(model, rng)
    raw = seeds_for(spec, model)

    start = time.perf_counter_ns()
    seeds, _ = normalize_seeds(model.facts, raw)
    result = propagate(transformed, model.facts, seeds, materialization)
    incremental = remap_incremental(before, result, mapping)
    middle = time.perf_counter_ns()
    oracle = evaluate(rules, apply_delta_set(model.facts, seeds))
    full = lcom1_all(oracle, mapping)
    end = time.perf_counter_ns()

    mismatched = [
        str(p) for p in (CP, LP) if result.new_state(p) != oracle.tuples(p)
    ]
    equal = incremental == full and not mismatched
    trial = Trial(index, seed, str(spec), middle - start, end - middle, equal)
    out = {"trial": trial}
    if not equal:
        out["reproduction"] = {
            "trial": index,
            "trial_seed": seed,
            "refactoring": str(spec),
            "seeds": [str(a) for a in seeds.prefixed_atoms()],
            "relations": mismatched,
            "incremental": {str(c): str(v) for c, v in incremental},
            "full": {str(c): str(v) for c, v in full},
        }
    return out


class BenchRunner:
    """
    Runs the trials of one benchmark.

    Trials run one after the other unless `max_jobs` allows more; parallel
    trials are dispatched in batches of `max_jobs` through joblib.
    """

    def __init__(
        self,
        params: BenchParams,
        status_monitor: Callable = NullStatusMonitor,
        max_jobs: int = 1,
        mapping: str = PROSE,
    ) -> None:
        """
        Create a new BenchRunner.

        Arguments:
            params (BenchParams): Model size, density, update count and seed
            status_monitor (StatusMonitor: NullStatusMonitor): Constructor for
                the StatusMonitor that tracks progress; called with the
                number of trials
            max_jobs (int: 1): The maximum number of trials to run at once
            mapping (str: "prose"): Which pair predicate LCOM1 counts

        """
        self.params = params.validate()
        self.max_jobs = max(max_jobs, 1)
        self.mapping = mapping
        self.status_monitor = status_monitor(params.updates)

    def prepare(self):
        rng = random.Random(self.params.seed)
        model = generate_model(self.params, rng)
        trial_seeds = [rng.randrange(2 ** 32) for _ in range(self.params.updates)]
        return model, trial_seeds

    def run(self) -> BenchReport:
        """
        Generate the model and run every trial.

        Arguments:
            None

        Returns:
            BenchReport: One Trial per update, all verdicts equal

        """
        model, trial_seeds = self.prepare()
        rules = lcom1_rules()
        transformed = transform(rules)
        materialization = evaluate(rules, model.facts)
        before = lcom1_all(materialization, self.mapping)
        logger.info("generated %r", model)

        report = BenchReport(self.params)
        self.status_monitor.launch_status()
        jobs = list(enumerate(trial_seeds))
        for offset in range(0, len(jobs), self.max_jobs):
            batch = jobs[offset:offset + self.max_jobs]
            args = (model, rules, transformed, materialization, before, self.mapping)
            if self.max_jobs == 1:
                outcomes = [run_trial(i, s, *args) for i, s in batch]
            else:
                outcomes = Parallel(n_jobs=self.max_jobs)(
                    delayed(run_trial)(i, s, *args) for i, s in batch
                )
            for outcome in outcomes:
                report.trials.append(outcome["trial"])
                if "reproduction" in outcome:
                    reproduction = {"params": asdict(self.params), **outcome["reproduction"]}
                    logger.error("mismatch: %s", reproduction)
                    raise MismatchDetected(
                        f"trial {outcome['trial'].index} ({outcome['trial'].refactoring}) "
                        "disagrees with full recomputation",
                        reproduction,
                    )
            self.status_monitor.emit_status(len(report.trials))
        logger.info(
            "%d trials, median speedup %.2f", len(report.trials), report.speedup
        )
        return report


def bench(params: BenchParams, seed: int = None, **kwargs) -> BenchReport:
    """
    Run a benchmark.

    Arguments:
        params (BenchParams): Benchmark parameters
        seed (int: None): Overrides `params.seed`
        **kwargs: Passed to BenchRunner

    Returns:
        BenchReport: Timings and equality verdicts

    """
    if seed is not None:
        params = BenchParams(**{**asdict(params), "seed": seed})
    return BenchRunner(params, **kwargs).run()
