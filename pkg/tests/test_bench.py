import json
import random

import pytest

from upcohesion.bench import (
    BenchParams,
    BenchReport,
    BenchRunner,
    Trial,
    bench,
    generate_model,
    random_refactoring,
)
from upcohesion.errors import BenchParameterError, MismatchDetected
from upcohesion.model import C, CM
from upcohesion.statusmonitor import StatusMonitor

SMALL = BenchParams(classes=8, methods=4, fields=3, density=0.4, updates=10, seed=5)


def test_no_updates_is_vacuously_equal():
    report = bench(BenchParams(classes=3, methods=2, fields=2, updates=0))
    assert report.trials == []
    assert report.equal
    assert report.speedup == 0.0


def test_small_bench_is_equal():
    report = bench(SMALL)
    assert len(report.trials) == 10
    assert all(t.equal for t in report.trials)
    assert "verdict: equal" in report.render()


def test_bench_is_reproducible():
    first, second = bench(SMALL), bench(SMALL)
    assert [(t.seed, t.refactoring, t.equal) for t in first.trials] == [
        (t.seed, t.refactoring, t.equal) for t in second.trials
    ]
    assert [t.refactoring for t in bench(SMALL, seed=6).trials] != [
        t.refactoring for t in first.trials
    ]


def test_generated_model_shape():
    model = generate_model(SMALL, random.Random(1))
    assert len(model.facts.tuples(C)) == 8
    assert len(model.facts.tuples(CM)) == 32
    assert model.methods_of("c2")[0] == "m2_1"
    assert model.fields_of("c8") == ["f8_1", "f8_2", "f8_3"]
    model.check()
    assert generate_model(SMALL, random.Random(1)) == model


def test_random_refactoring_is_valid():
    rng = random.Random(9)
    model = generate_model(SMALL, rng)
    for _ in range(20):
        spec = random_refactoring(model, rng)
        assert spec.element in (model.methods_of(spec.source) + model.fields_of(spec.source))


@pytest.mark.parametrize(
    "params",
    [
        BenchParams(classes=0),
        BenchParams(methods=0),
        BenchParams(updates=-1),
        BenchParams(density=1.5),
    ],
)
def test_invalid_parameters(params):
    with pytest.raises(BenchParameterError):
        bench(params)


def test_json_report_fields():
    report = bench(BenchParams(classes=4, methods=3, fields=2, updates=3, seed=2))
    data = json.loads(json.dumps(report.to_json()))
    assert data["classes"] == 4 and data["methods_per_class"] == 3
    assert data["equal"] is True
    assert len(data["trials"]) == 3
    assert {"t_incremental_ns", "t_full_ns", "equal", "seed"} <= set(data["trials"][0])


def test_parallel_trials_agree():
    sequential = bench(SMALL)
    parallel = bench(SMALL, max_jobs=2)
    assert [t.refactoring for t in parallel.trials] == [t.refactoring for t in sequential.trials]
    assert parallel.equal


class RecordingMonitor(StatusMonitor):
    seen = []

    def __init__(self, total, **kwargs):
        self.total = total

    def emit_status(self, completed, mismatches=0):
        RecordingMonitor.seen.append((completed, self.total))


def test_status_monitor_gets_progress():
    RecordingMonitor.seen = []
    bench(BenchParams(classes=3, methods=2, fields=2, updates=4), status_monitor=RecordingMonitor)
    assert RecordingMonitor.seen[-1] == (4, 4)


def test_mismatch_carries_reproduction(monkeypatch):
    import upcohesion.bench as bench_module

    def broken(*args, **kwargs):
        trial = Trial(0, 1, "move-method m1_1 c1 -> new", 1, 1, False)
        return {"trial": trial, "reproduction": {"trial": 0, "trial_seed": 1}}

    monkeypatch.setattr(bench_module, "run_trial", broken)
    with pytest.raises(MismatchDetected) as info:
        BenchRunner(BenchParams(classes=2, methods=1, fields=1, updates=1)).run()
    assert info.value.reproduction["trial_seed"] == 1
    assert info.value.reproduction["params"]["classes"] == 2


def test_speedup_is_the_median():
    report = BenchReport(SMALL, [Trial(i, 0, "x", 10, full, True) for i, full in enumerate((10, 30, 50))])
    assert report.speedup == 3.0


@pytest.mark.slow
def test_incremental_is_faster_on_a_full_size_model():
    report = bench(BenchParams(classes=200, updates=20, seed=1))
    assert len(report.trials) == 20
    assert report.equal
    assert report.speedup >= 1.0
