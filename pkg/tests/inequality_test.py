"""Tests for the walklab.inequality module."""

from __future__ import annotations

import math

import numpy as np
import pytest

from walklab.estimates import EstimateCI, VolumeEstimate, VolumeMethod
from walklab.exceptions import (
    DegenerateGrowthError,
    OptimizationFailedError,
    UndefinedDriftError,
    UsageError,
)
from walklab.ext.presentation import Presentation
from walklab.inequality import (
    GROUP_CONSTANT_NOTE,
    Budgets,
    MeasurePolicy,
    QRatio,
    Verdict,
    classify,
    compare_systems,
    estimate_volume,
    fundamental_report,
    optimize_measure,
    q_ratio,
)
from walklab.measures import SymmetricMeasure, pair_codes
from walklab.presentations import (
    FreeAbelianPresentation,
    FreePresentation,
    LocallyFreeGroupPresentation,
    LocallyFreeSemigroupPresentation,
)
from walklab.systems import GeneratingSystemSpec
from walklab.walks import drift, entropy_rate

LOG3 = math.log2(3)

SMALL_BUDGETS = Budgets(
    max_n=6,
    steps=500,
    trials=20,
    inner_max_n=5,
    inner_evaluations=12,
    cutoff_radius=5,
)


def estimate(value: float, stderr: float = 0.0) -> EstimateCI:
    return EstimateCI(value=value, stderr=stderr, method="test")


def volume(value: float) -> VolumeEstimate:
    return VolumeEstimate(value=value, method=VolumeMethod.closed_form)


def test_q_ratio_free_group() -> None:
    q = q_ratio(estimate(0.5 * LOG3), estimate(0.5, 0.001), volume(LOG3))
    assert q.value == pytest.approx(1.0, abs=1e-12)
    assert q.within_bound


def test_q_ratio_zero_entropy() -> None:
    q = q_ratio(estimate(0.0), estimate(0.5, 0.001), volume(LOG3))
    assert q.value == 0.0


def test_q_ratio_semigroup() -> None:
    q = q_ratio(estimate(LOG3), estimate(1.0), volume(2.0))
    assert q.value == pytest.approx(0.7925, abs=1e-4)
    assert q.stderr == 0.0


def test_q_ratio_scale_invariance() -> None:
    h = estimate(0.7, 0.01)
    l = estimate(0.6, 0.005)  # noqa: E741
    v = volume(1.5)
    base = q_ratio(h, l, v)
    for factor in (0.5, 3.0, 17.0):
        scaled = q_ratio(h.scaled(factor), l.scaled(factor), v)
        assert scaled.value == pytest.approx(base.value, rel=1e-12)
        assert scaled.stderr == pytest.approx(base.stderr, rel=1e-12)


def test_q_ratio_error_propagation() -> None:
    q = q_ratio(estimate(0.5, 0.03), estimate(0.5, 0.01), volume(1.0))
    assert q.value == pytest.approx(1.0)
    assert q.stderr == pytest.approx(math.hypot(0.06, 0.02))


def test_q_ratio_undefined_drift() -> None:
    with pytest.raises(UndefinedDriftError):
        q_ratio(estimate(0.1), estimate(0.01, 0.01), volume(1.0))
    with pytest.raises(UndefinedDriftError):
        q_ratio(estimate(0.1), estimate(0.0), volume(1.0))


def test_q_ratio_zero_volume() -> None:
    with pytest.raises(DegenerateGrowthError):
        q_ratio(estimate(0.1), estimate(0.5, 0.001), volume(0.0))


def test_q_ratio_beyond_bound(caplog: pytest.LogCaptureFixture) -> None:
    q = q_ratio(estimate(1.0), estimate(0.5, 0.001), volume(1.0))
    assert q.value == pytest.approx(2.0)
    assert not q.within_bound
    assert "exceeds 1" in caplog.text


@pytest.mark.parametrize(
    ("value", "stderr", "verdict"),
    [
        (0.97, 0.01, Verdict.consistent_with_equality),
        (1.04, 0.01, Verdict.consistent_with_equality),
        (0.90, 0.06, Verdict.consistent_with_equality),
        (0.80, 0.02, Verdict.strictly_below),
        (0.93, 0.01, Verdict.inconclusive),
    ],
)
def test_classify(value: float, stderr: float, verdict: Verdict) -> None:
    q = QRatio(value=value, stderr=stderr, within_bound=True)
    assert classify(q) is verdict


def test_budgets_for_system() -> None:
    budgets = Budgets().for_system(6, seed=9)
    assert budgets.steps == 6
    assert budgets.burn_in == 3
    assert budgets.max_n == 6
    assert budgets.inner_max_n == 6
    assert budgets.volume_depth == 6
    assert budgets.seed == 9
    assert budgets.trials == Budgets().trials


def test_estimate_volume_closed_form(free2: FreePresentation) -> None:
    v, spheres = estimate_volume(free2, 5)
    assert v.method is VolumeMethod.closed_form
    assert spheres is None


def test_estimate_volume_enumerated(
    lfgroup3: LocallyFreeGroupPresentation,
) -> None:
    v, spheres = estimate_volume(lfgroup3, 6)
    assert v.method is VolumeMethod.sphere_ratio_fit
    assert spheres is not None
    assert spheres.depth == 6


def test_estimate_volume_partial(
    lfgroup3: LocallyFreeGroupPresentation,
) -> None:
    v, spheres = estimate_volume(lfgroup3, 8, cap=2_000)
    assert spheres is not None
    assert 2 <= spheres.depth < 8
    assert v.value > 0.0


def test_report_free2(free2: FreePresentation) -> None:
    budgets = Budgets(max_n=8, steps=4000, trials=100)
    report = fundamental_report(
        free2, SymmetricMeasure.uniform(free2), budgets
    )
    assert report.presentation == "free:2"
    assert report.v.value == pytest.approx(LOG3)
    assert report.l.value == pytest.approx(0.5, abs=0.03)
    assert report.q is not None
    assert report.q.value == pytest.approx(1.0, abs=0.05)
    assert report.verdict is Verdict.consistent_with_equality
    assert report.typical_fraction_rate is not None
    assert report.zero_entropy_holds is None
    assert report.inequality_margin == pytest.approx(
        report.l.value * report.v.value - report.h.value
    )
    assert report.measure == {
        "z1": 0.25,
        "z1^-1": 0.25,
        "z2": 0.25,
        "z2^-1": 0.25,
    }


def test_report_is_reproducible(
    lfgroup3: LocallyFreeGroupPresentation,
) -> None:
    mu = SymmetricMeasure.uniform(lfgroup3)
    budgets = SMALL_BUDGETS.model_copy(update={"volume_depth": 5})
    assert fundamental_report(lfgroup3, mu, budgets) == fundamental_report(
        lfgroup3, mu, budgets
    )


def test_report_zero_drift(abelian2: FreeAbelianPresentation) -> None:
    budgets = Budgets(max_n=8, steps=2000, trials=100)
    report = fundamental_report(
        abelian2, SymmetricMeasure.uniform(abelian2), budgets
    )
    assert report.verdict is Verdict.undefined_drift
    assert report.q is None
    assert report.typical_fraction_rate is None
    assert report.zero_entropy_holds
    assert report.h.value <= 0.05
    assert report.v.value == 0.0
    assert any("Drift is zero" in note for note in report.notes)


def test_report_semigroup() -> None:
    presentation = LocallyFreeSemigroupPresentation(4)
    budgets = Budgets(max_n=8, steps=50, trials=10)
    report = fundamental_report(
        presentation, SymmetricMeasure.uniform(presentation), budgets
    )
    assert report.l.value == 1.0
    assert report.l.stderr == 0.0
    assert report.v.method is VolumeMethod.moebius_root
    assert report.v.value == pytest.approx(LOG3, abs=1e-9)
    assert report.q is not None


def test_report_truncated_entropy(free2: FreePresentation) -> None:
    budgets = Budgets(max_n=8, steps=200, trials=10, element_cap=200)
    report = fundamental_report(
        free2, SymmetricMeasure.uniform(free2), budgets
    )
    assert report.entropy.truncated
    assert any("element budget" in note for note in report.notes)


def test_report_truncated_entropy_is_not_equality(
    free2: FreePresentation,
) -> None:
    # mu^{*6} has 1093 elements, so the sequence stops at n = 5.
    budgets = Budgets(max_n=8, steps=4000, trials=100, element_cap=1000)
    report = fundamental_report(
        free2, SymmetricMeasure.uniform(free2), budgets
    )
    assert report.entropy.max_n == 5
    assert report.q is not None
    assert classify(report.q) is Verdict.consistent_with_equality
    assert report.verdict is Verdict.inconclusive
    assert any("truncated" in note for note in report.notes)


def test_optimize_free2(free2: FreePresentation) -> None:
    result = optimize_measure(free2, SMALL_BUDGETS, restarts=2)
    trace = result.trace
    assert 2 <= len(trace) <= 2 * SMALL_BUDGETS.inner_evaluations
    assert {e.restart for e in trace} == {0, 1}
    assert trace[0].weights == pytest.approx([0.5, 0.5])
    assert result.uniform_objective == trace[0].objective
    assert result.objective >= result.uniform_objective
    bests = [e.best for e in trace if e.best is not None]
    assert bests == sorted(bests)
    assert bests[-1] == result.objective
    for e in trace:
        assert sum(e.weights) == pytest.approx(1.0)
        assert min(e.weights) >= SMALL_BUDGETS.w_min - 1e-15
    assert result.measure.presentation == "free:2"
    assert result.report.measure == result.weights


def test_optimize_is_deterministic(
    lfgroup3: LocallyFreeGroupPresentation,
) -> None:
    budgets = SMALL_BUDGETS.model_copy(update={"volume_depth": 5})
    first = optimize_measure(lfgroup3, budgets, restarts=2, master_seed=4)
    second = optimize_measure(lfgroup3, budgets, restarts=2, master_seed=4)
    assert first == second


def test_optimize_independent_of_workers(free2: FreePresentation) -> None:
    serial = optimize_measure(free2, SMALL_BUDGETS, restarts=2)
    parallel = optimize_measure(
        free2, SMALL_BUDGETS.model_copy(update={"workers": 2}), restarts=2
    )
    assert serial.trace == parallel.trace
    assert serial.measure == parallel.measure


def test_optimize_fails_without_drift() -> None:
    presentation = FreeAbelianPresentation(1)
    with pytest.raises(OptimizationFailedError) as excinfo:
        optimize_measure(presentation, SMALL_BUDGETS, restarts=1)
    assert excinfo.value.exit_code == 5


def test_optimize_invalid_arguments(free2: FreePresentation) -> None:
    with pytest.raises(UsageError):
        optimize_measure(free2, SMALL_BUDGETS, restarts=0)
    with pytest.raises(UsageError):
        optimize_measure(
            free2, SMALL_BUDGETS.model_copy(update={"w_min": 0.5}), restarts=1
        )


STANDARD = GeneratingSystemSpec(base="free:2", words=("z1", "z2"))
EXTENDED = GeneratingSystemSpec(base="free:2", words=("z1", "z2", "z1 z2"))


def test_compare_systems(free2: FreePresentation) -> None:
    budgets = SMALL_BUDGETS.model_copy(update={"trials": 100})
    comparison = compare_systems(
        free2, [STANDARD, EXTENDED], MeasurePolicy.uniform, budgets
    )
    assert comparison.base == "free:2"
    assert comparison.note == GROUP_CONSTANT_NOTE
    assert {e.system for e in comparison.entries} == {
        "{z1, z2}",
        "{z1, z2, z1 z2}",
    }
    qs = [e.q for e in comparison.entries]
    assert all(q is not None for q in qs)
    assert qs == sorted(qs, reverse=True)
    for entry in comparison.entries:
        assert entry.report.presentation == f"free:2{entry.system}"
        assert entry.report.l.steps == 5
        assert entry.report.l.burn_in == 2
        assert entry.report.l.method == "exact_expected_length"
        assert entry.report.l.value == (
            entry.report.entropy.accelerated_drift
        )
        assert entry.discarded == 0


def test_compare_ignores_order(free2: FreePresentation) -> None:
    forward = compare_systems(
        free2, [STANDARD, EXTENDED], budgets=SMALL_BUDGETS
    )
    backward = compare_systems(
        free2, [EXTENDED, STANDARD], budgets=SMALL_BUDGETS
    )
    assert forward == backward


def test_compare_duplicates(free2: FreePresentation) -> None:
    comparison = compare_systems(
        free2, [STANDARD, STANDARD], budgets=SMALL_BUDGETS
    )
    first, second = comparison.entries
    assert first == second


def test_compare_zero_drift() -> None:
    base = FreeAbelianPresentation(1)
    specs = [
        GeneratingSystemSpec(base="abelian:1", words=("z1",)),
        GeneratingSystemSpec(base="abelian:1", words=("z1", "z1 z1")),
    ]
    comparison = compare_systems(base, specs, budgets=SMALL_BUDGETS)
    for entry in comparison.entries:
        assert entry.verdict is Verdict.undefined_drift
        assert entry.q is None
    digests = [e.digest for e in comparison.entries]
    assert digests == sorted(digests)


def test_compare_optimized(free2: FreePresentation) -> None:
    comparison = compare_systems(
        free2,
        [STANDARD],
        MeasurePolicy.optimized,
        SMALL_BUDGETS,
        restarts=1,
    )
    assert comparison.policy is MeasurePolicy.optimized
    assert comparison.entries[0].q is not None


def test_compare_nothing(free2: FreePresentation) -> None:
    with pytest.raises(UsageError):
        compare_systems(free2, [], budgets=SMALL_BUDGETS)


@pytest.mark.slow
def test_report_free2_acceptance(free2: FreePresentation) -> None:
    report = fundamental_report(free2, SymmetricMeasure.uniform(free2))
    assert report.l.value == pytest.approx(0.5, abs=0.01)
    assert report.h.value == pytest.approx(0.5 * LOG3, abs=0.05)
    assert report.q is not None
    assert report.q.value == pytest.approx(1.0, abs=0.05)
    assert report.verdict is Verdict.consistent_with_equality
    assert report.inequality_holds


@pytest.mark.slow
def test_drift_free3_acceptance() -> None:
    presentation = FreePresentation(3)
    report = fundamental_report(
        presentation,
        SymmetricMeasure.uniform(presentation),
        Budgets(max_n=6),
    )
    assert report.l.value == pytest.approx(2 / 3, abs=0.01)


@pytest.mark.slow
def test_report_lfgroup6_acceptance() -> None:
    presentation = LocallyFreeGroupPresentation(6)
    report = fundamental_report(
        presentation,
        SymmetricMeasure.uniform(presentation),
        Budgets(),
    )
    assert 2.2 <= report.v.value <= 3.1
    assert report.l.value <= 2 / 3 + 0.02
    assert report.inequality_holds
    assert report.q is not None
    assert report.verdict is Verdict.strictly_below
    assert report.q.value + 2 * report.q.stderr < 0.95


@pytest.mark.slow
@pytest.mark.parametrize(
    "presentation",
    [
        FreePresentation(2),
        FreePresentation(3),
        LocallyFreeGroupPresentation(4),
        LocallyFreeSemigroupPresentation(4),
    ],
    ids=repr,
)
def test_inequality_sweep(presentation: Presentation) -> None:
    rng = np.random.default_rng(2024)
    budgets = Budgets(max_n=8, steps=2000, trials=50)
    for _ in range(20):
        weights = rng.dirichlet(np.ones(len(pair_codes(presentation))))
        mu = SymmetricMeasure.from_pair_weights(presentation, list(weights))
        report = fundamental_report(presentation, mu, budgets)
        assert report.inequality_holds, report.measure


@pytest.mark.slow
def test_optimize_free2_acceptance(free2: FreePresentation) -> None:
    result = optimize_measure(free2, restarts=5)
    uniform = SymmetricMeasure.uniform(free2)
    assert result.measure.total_variation(uniform) <= 0.05
    assert result.q is not None
    assert 0.93 <= result.q.value <= 1.02


@pytest.mark.slow
def test_compare_standard_system_acceptance(free2: FreePresentation) -> None:
    comparison = compare_systems(free2, [STANDARD])
    (entry,) = comparison.entries
    assert entry.q is not None
    assert entry.q == pytest.approx(1.0, abs=0.05)
    assert entry.verdict is Verdict.consistent_with_equality
    assert entry.report.v.value == pytest.approx(LOG3)
    assert entry.report.l.value == pytest.approx(0.5, abs=0.005)


@pytest.mark.slow
def test_compare_systems_acceptance(free2: FreePresentation) -> None:
    comparison = compare_systems(
        free2, [EXTENDED, STANDARD], budgets=Budgets(cutoff_radius=8)
    )
    assert [e.system for e in comparison.entries] == [
        "{z1, z2}",
        "{z1, z2, z1 z2}",
    ]
    for entry in comparison.entries:
        assert entry.q is not None
        assert entry.q <= 1.0 + 0.05
        assert entry.report.inequality_holds
        assert entry.discarded == 0


@pytest.mark.slow
def test_q_semigroup_large_k() -> None:
    # Exact convolutions of LF+_20 are out of reach; the entropy of the walk
    # on ten generators stands in for it.
    wide = LocallyFreeSemigroupPresentation(20)
    narrow = LocallyFreeSemigroupPresentation(10)
    v, _ = estimate_volume(wide, 7)
    speed = drift(wide, SymmetricMeasure.uniform(wide), 100, 10, 0)
    rate = entropy_rate(narrow, SymmetricMeasure.uniform(narrow), 8)
    assert v.value == pytest.approx(2.0, abs=0.05)
    assert speed.value == 1.0
    q = q_ratio(rate.estimate, speed, v)
    assert q.value == pytest.approx(0.5 * LOG3, abs=0.05)
    assert q.value < 1.0
