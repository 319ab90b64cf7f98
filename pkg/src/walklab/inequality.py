"""The fundamental inequality ``h <= l v``, normalized entropy, measure
optimization and the comparison of generating systems.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Sequence
from concurrent.futures import ProcessPoolExecutor
from enum import Enum

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy.optimize import minimize

from walklab.enumeration import (
    DEFAULT_ELEMENT_CAP,
    SphereCounts,
    enumerate_ball,
    log_volume,
)
from walklab.estimates import EstimateCI, VolumeEstimate
from walklab.exceptions import (
    BudgetExceededError,
    CutoffExceededError,
    DegenerateGrowthError,
    OptimizationFailedError,
    UndefinedDriftError,
    UnreliableComparisonError,
    UsageError,
)
from walklab.ext.presentation import Presentation
from walklab.measures import SymmetricMeasure, pair_codes
from walklab.systems import (
    DEFAULT_CUTOFF_RADIUS,
    DEFAULT_GENERATION_DEPTH,
    GeneratingSystemSpec,
    SystemPresentation,
)
from walklab.walks import (
    DriftEstimate,
    EntropyEstimator,
    EntropyRate,
    drift,
    entropy_rate,
    trial_seed,
)

__all__ = [
    "Budgets",
    "Comparison",
    "ConstantsReport",
    "MeasurePolicy",
    "OptimizationResult",
    "QRatio",
    "SystemEntry",
    "TraceEntry",
    "Verdict",
    "classify",
    "compare_systems",
    "estimate_volume",
    "fundamental_report",
    "optimize_measure",
    "q_ratio",
]

EQUALITY_BAND = 0.05
"""Smallest half-width of the band around ``q = 1`` read as equality."""

STRICT_CEILING = 0.95
"""``q + 2 sigma`` must stay below this for a strict inequality."""

SIGMA_FACTOR = 2.0
"""Multiple of the propagated uncertainty used by the verdicts."""

INEQUALITY_SIGMAS = 3.0
"""Tolerance of the numerical check ``h <= l v``, in combined sigmas."""

ZERO_ENTROPY_TOLERANCE = 0.05
"""Entropy rate (bits per step) accepted as zero for zero-drift walks."""

DISCARD_LIMIT = 0.1
"""Largest share of walks that may leave a distance table in a comparison.
"""

GROUP_CONSTANT_NOTE = (
    "q_G, the supremum of q(S) over all finite generating systems, is not "
    "computed; the ranking covers the listed systems only."
)


class Verdict(str, Enum):
    """Reading of ``q = h / (l v)`` against the extremal value 1."""

    consistent_with_equality = "consistent_with_equality"
    strictly_below = "strictly_below"
    inconclusive = "inconclusive"
    """q is neither within the equality band nor clearly below it."""

    undefined_drift = "undefined_drift"

    def __str__(self) -> str:
        return self.value


class MeasurePolicy(str, Enum):
    """Measure used on each system of a comparison."""

    uniform = "uniform"
    optimized = "optimized"

    def __str__(self) -> str:
        return self.value


class Budgets(BaseModel):
    """Computation budgets shared by the reports."""

    model_config = ConfigDict(frozen=True)

    element_cap: int = Field(DEFAULT_ELEMENT_CAP, gt=0)
    """Largest number of stored elements (BFS balls, convolutions)."""

    max_n: int = Field(10, ge=2)
    """Depth of the exact convolution powers."""

    volume_depth: int = Field(7, ge=2)
    """BFS radius for presentations without a closed-form volume."""

    steps: int = Field(10_000, ge=1)
    """Walk length for drift estimates."""

    burn_in: int = Field(0, ge=0)
    """Burn-in subtracted from each walk, see `walklab.walks.drift`."""

    trials: int = Field(200, ge=2)
    """Number of Monte Carlo walks."""

    seed: int = Field(0, ge=0)
    """Master seed."""

    workers: int = Field(1, ge=1)
    """Worker processes for walks, restarts and comparisons."""

    estimator: EntropyEstimator = EntropyEstimator.log_corrected
    """Headline entropy estimator."""

    w_min: float = Field(1e-4, ge=0.0, lt=1.0)
    """Smallest weight of an inverse pair during optimization."""

    inner_max_n: int = Field(8, ge=3)
    """Convolution depth of the optimizer's inner objective."""

    inner_evaluations: int = Field(80, ge=1)
    """Objective evaluations per optimizer restart."""

    cutoff_radius: int = Field(DEFAULT_CUTOFF_RADIUS, ge=2)
    """Radius of the distance tables of generating systems."""

    generation_depth: int = Field(DEFAULT_GENERATION_DEPTH, ge=1)
    """Depth within which a generating system must reach the base
    generators.
    """

    def for_system(self, radius: int, seed: int) -> Budgets:
        """Budgets for a system whose distance table has radius ``radius``.

        Walks stop at the radius and drop the first half as burn-in, so that
        no walk leaves the table.
        """
        return self.model_copy(
            update={
                "steps": radius,
                "burn_in": radius // 2,
                "max_n": min(self.max_n, radius),
                "volume_depth": radius,
                "inner_max_n": min(self.inner_max_n, radius),
                "seed": seed,
            }
        )


class QRatio(BaseModel):
    """The ratio ``q = h / (l v)`` with its propagated uncertainty."""

    model_config = ConfigDict(frozen=True)

    value: float
    stderr: float = Field(ge=0.0)

    within_bound: bool
    """Whether ``q <= 1`` holds within tolerance."""


class ConstantsReport(BaseModel):
    """Volume, drift, entropy and their ratio for one measure."""

    model_config = ConfigDict(frozen=True)

    presentation: str
    """Tag of the presentation."""

    measure: dict[str, float]
    """Step measure keyed by letter tokens."""

    v: VolumeEstimate
    """Logarithmic volume."""

    l: DriftEstimate  # noqa: E741
    """Drift."""

    h: EstimateCI
    """Headline entropy estimate."""

    entropy: EntropyRate
    """Exact entropy sequence behind ``h``."""

    spheres: SphereCounts | None = None
    """Sphere counts, when the volume was enumerated."""

    q: QRatio | None = None
    """``h / (l v)``; omitted when the drift is undefined."""

    verdict: Verdict
    """Extremality verdict."""

    inequality_margin: float
    """``l v - h`` in bits per step."""

    inequality_sigma: float
    """Combined standard error of the margin."""

    inequality_holds: bool
    """Whether ``h <= l v + 3 sigma``."""

    typical_fraction_rate: float | None = None
    """``v - h / l``: exponential rate, per unit of length, at which the
    typical words of the walk thin out in the sphere.
    """

    zero_entropy_holds: bool | None = None
    """For zero drift, whether the entropy is also zero within tolerance."""

    notes: list[str] = Field(default_factory=list)


class TraceEntry(BaseModel):
    """One objective evaluation of the measure optimizer."""

    model_config = ConfigDict(frozen=True)

    restart: int
    evaluation: int
    weights: list[float]
    """Weight of each inverse pair (each generator for semigroups)."""

    objective: float | None
    """Inner ``h / (l v)``, or None where the drift vanished."""

    best: float | None
    """Best objective so far along the whole trace."""


class OptimizationResult(BaseModel):
    """The measure of largest normalized entropy found on a system."""

    model_config = ConfigDict(frozen=True)

    measure: SymmetricMeasure
    weights: dict[str, float]
    """Best measure keyed by letter tokens."""

    objective: float
    """Inner objective of the best measure."""

    uniform_objective: float | None
    """Inner objective of the uniform measure."""

    report: ConstantsReport
    """Full-budget report of the best measure."""

    trace: list[TraceEntry]

    @property
    def q(self) -> QRatio | None:
        """Full-budget estimate of q(S)."""
        return self.report.q


class SystemEntry(BaseModel):
    """One ranked generating system."""

    model_config = ConfigDict(frozen=True)

    system: str
    """Label of the system, such as ``{z1, z2}``."""

    words: tuple[str, ...]
    digest: str
    verdict: Verdict
    q: float | None
    report: ConstantsReport
    discarded: int
    """Walks that left the distance table."""


class Comparison(BaseModel):
    """Generating systems of one group ranked by q."""

    model_config = ConfigDict(frozen=True)

    base: str
    policy: MeasurePolicy
    entries: list[SystemEntry]
    note: str = GROUP_CONSTANT_NOTE


def q_ratio(
    h: EstimateCI,
    l: EstimateCI,  # noqa: E741
    v: VolumeEstimate,
) -> QRatio:
    """Compute ``q = h / (l v)`` with first-order error propagation.

    Raises
    ------
    walklab.exceptions.UndefinedDriftError
        Raised if the drift interval contains zero.
    walklab.exceptions.DegenerateGrowthError
        Raised if the volume is zero.
    """
    if not l.excludes_zero() or l.value <= 0.0:
        raise UndefinedDriftError(
            f"q is undefined: the drift {l.value:.4f} ± {l.half_width:.4f} "
            "is not bounded away from zero."
        )
    if v.value <= 0.0:
        raise DegenerateGrowthError("q is undefined for zero volume.")
    denominator = l.value * v.value
    value = h.value / denominator
    stderr = math.hypot(h.stderr / denominator, value * l.stderr / l.value)
    within = value <= 1.0 + max(EQUALITY_BAND, INEQUALITY_SIGMAS * stderr)
    if not within:
        logging.getLogger(__name__).warning(
            "q = %.4f ± %.4f exceeds 1; the estimates are not converged",
            value,
            stderr,
        )
    return QRatio(value=value, stderr=stderr, within_bound=within)


def estimate_volume(
    presentation: Presentation,
    depth: int,
    *,
    cap: int = DEFAULT_ELEMENT_CAP,
) -> tuple[VolumeEstimate, SphereCounts | None]:
    """Logarithmic volume from a closed form, or else from enumerated
    spheres (the completed levels when the budget runs out).
    """
    if isinstance(presentation, SystemPresentation):
        counts = presentation.spheres
        return log_volume(counts), counts
    try:
        return log_volume(presentation), None
    except UsageError:
        pass
    try:
        counts = enumerate_ball(presentation, depth, cap=cap)
    except BudgetExceededError as e:
        counts = e.partial
        logging.getLogger(__name__).info(
            "Volume of %s from %d complete radii",
            presentation.tag,
            e.completed,
        )
    return log_volume(counts), counts


def fundamental_report(
    presentation: Presentation,
    measure: SymmetricMeasure,
    budgets: Budgets | None = None,
) -> ConstantsReport:
    """Estimate v, l and h and check the fundamental inequality.

    When the drift vanishes (or the volume is zero) the verdict is
    ``undefined_drift``, q is omitted and the entropy is checked to be zero
    as well. An entropy sequence cut short by the element budget never
    affirms equality: that verdict becomes ``inconclusive``.

    On a generating system the walks stay inside the distance table, so
    they only decide whether the drift vanishes and count discards. A
    positive drift is then read from the exact expected lengths, see
    `walklab.walks.EntropyRate.accelerated_drift`.
    """
    logger = logging.getLogger(__name__)
    budgets = budgets or Budgets()
    v, spheres = estimate_volume(
        presentation, budgets.volume_depth, cap=budgets.element_cap
    )
    l = drift(  # noqa: E741
        presentation,
        measure,
        budgets.steps,
        budgets.trials,
        budgets.seed,
        burn_in=budgets.burn_in,
        workers=budgets.workers,
    )
    rate = entropy_rate(
        presentation,
        measure,
        budgets.max_n,
        cap=budgets.element_cap,
        estimator=budgets.estimator,
    )
    h = rate.estimate
    if isinstance(presentation, SystemPresentation) and not l.vanishes():
        l = _expected_length_drift(l, rate)  # noqa: E741
    notes: list[str] = []
    if rate.truncated:
        notes.append(
            f"Entropy sequence stopped at n={rate.max_n} by the element "
            "budget."
        )

    margin = l.value * v.value - h.value
    sigma = math.sqrt(
        h.stderr**2 + (v.value * l.stderr) ** 2 + (l.value * v.spread) ** 2
    )
    holds = margin >= -INEQUALITY_SIGMAS * sigma
    if not holds:
        logger.warning(
            "h <= l v fails for %s: margin %.4f, sigma %.4f",
            presentation.tag,
            margin,
            sigma,
        )

    q: QRatio | None = None
    verdict = Verdict.undefined_drift
    typical_fraction_rate: float | None = None
    zero_entropy: bool | None = None
    if l.vanishes() or v.value == 0.0:
        zero_entropy = h.value <= (
            ZERO_ENTROPY_TOLERANCE + SIGMA_FACTOR * h.stderr
        )
        if not zero_entropy:
            logger.warning(
                "Zero drift on %s but entropy %.4f", presentation.tag, h.value
            )
        notes.append("Drift is zero within tolerance; q is undefined.")
    else:
        q = q_ratio(h, l, v)
        verdict = classify(q)
        if rate.truncated and verdict is Verdict.consistent_with_equality:
            verdict = Verdict.inconclusive
            notes.append(
                "Equality is not affirmed from a truncated entropy sequence."
            )
        typical_fraction_rate = v.value - h.value / l.value

    return ConstantsReport(
        presentation=presentation.tag,
        measure=measure.describe(presentation),
        v=v,
        l=l,
        h=h,
        entropy=rate,
        spheres=spheres,
        q=q,
        verdict=verdict,
        inequality_margin=margin,
        inequality_sigma=sigma,
        inequality_holds=holds,
        typical_fraction_rate=typical_fraction_rate,
        zero_entropy_holds=zero_entropy,
        notes=notes,
    )


def optimize_measure(
    presentation: Presentation,
    budgets: Budgets | None = None,
    restarts: int = 5,
    master_seed: int | None = None,
) -> OptimizationResult:
    """Search for the measure of largest ``h / (l v)`` on a system.

    Nelder-Mead runs over one weight per inverse pair (per generator for
    semigroups). Weights are kept at least ``w_min`` through a floored
    softmax, so every search point is a fully supported symmetric measure.
    The objective uses exact inner estimates at depth ``inner_max_n``: the
    entropy rate and the drift from the expected lengths. Restart 0 starts
    at the uniform measure; the others start at seeded random points. The
    best measure is re-evaluated with the full budgets.

    Raises
    ------
    walklab.exceptions.OptimizationFailedError
        Raised if the drift vanishes at every evaluated measure.
    """
    logger = logging.getLogger(__name__)
    budgets = budgets or Budgets()
    if master_seed is not None:
        budgets = budgets.model_copy(update={"seed": master_seed})
    if restarts < 1:
        raise UsageError(f"Optimization needs a restart (got {restarts}).")
    generators = len(pair_codes(presentation))
    if generators * budgets.w_min >= 1.0:
        raise UsageError(
            f"w_min={budgets.w_min} leaves no room for {generators} weights."
        )
    volume, _ = estimate_volume(
        presentation, budgets.volume_depth, cap=budgets.element_cap
    )

    jobs = [(presentation, budgets, volume.value, r) for r in range(restarts)]
    if budgets.workers > 1 and restarts > 1:
        with ProcessPoolExecutor(max_workers=budgets.workers) as executor:
            runs = list(executor.map(_run_restart, jobs))
    else:
        runs = [_run_restart(job) for job in jobs]

    trace: list[TraceEntry] = []
    best: float | None = None
    for restart, evaluations in enumerate(runs):
        for i, (weights, objective) in enumerate(evaluations):
            if objective is not None and (best is None or objective > best):
                best = objective
            trace.append(
                TraceEntry(
                    restart=restart,
                    evaluation=i,
                    weights=weights,
                    objective=objective,
                    best=best,
                )
            )
    candidates = [
        (e.objective, -e.restart, -e.evaluation, e.weights)
        for e in trace
        if e.objective is not None
    ]
    if not candidates:
        raise OptimizationFailedError(
            f"The drift vanished at every measure tried on {presentation.tag}."
        )
    objective, *_, weights = max(candidates, key=lambda c: c[:3])
    uniform_objective = runs[0][0][1]
    logger.info(
        "Best inner objective on %s: %.4f (uniform %s)",
        presentation.tag,
        objective,
        uniform_objective,
    )
    measure = SymmetricMeasure.from_pair_weights(presentation, weights)
    return OptimizationResult(
        measure=measure,
        weights=measure.describe(presentation),
        objective=objective,
        uniform_objective=uniform_objective,
        report=fundamental_report(presentation, measure, budgets),
        trace=trace,
    )


def compare_systems(
    base: Presentation,
    specs: Sequence[GeneratingSystemSpec],
    policy: MeasurePolicy = MeasurePolicy.uniform,
    budgets: Budgets | None = None,
    *,
    restarts: int = 5,
) -> Comparison:
    """Rank generating systems of a group by q in their own word metric.

    Each system gets a BFS distance table of radius ``cutoff_radius``;
    volume, drift and entropy are all measured in that metric. Walks have the
    table's radius as length and drop the first half as burn-in; they decide
    whether the drift vanishes, and a positive drift is read from the exact
    expected lengths. Seeds derive from the master seed and each system's
    content, so the ranking does not depend on the order of ``specs``.

    Raises
    ------
    walklab.exceptions.UnreliableComparisonError
        Raised if more than 10% of a system's walks leave its distance table.
    """
    budgets = budgets or Budgets()
    if not specs:
        raise UsageError("Nothing to compare.")
    jobs = [(base, spec, policy, budgets, restarts) for spec in specs]
    if budgets.workers > 1 and len(jobs) > 1:
        serial = budgets.model_copy(update={"workers": 1})
        jobs = [(base, spec, policy, serial, restarts) for spec in specs]
        with ProcessPoolExecutor(max_workers=budgets.workers) as executor:
            entries = list(executor.map(_compare_one, jobs))
    else:
        entries = [_compare_one(job) for job in jobs]
    entries.sort(
        key=lambda e: (e.q is None, -(e.q or 0.0), e.digest, e.system)
    )
    return Comparison(base=base.tag, policy=policy, entries=entries)


def classify(q: QRatio) -> Verdict:
    """Verdict for a defined q: equality within ``max(0.05, 2 sigma)``,
    strictly below when ``q + 2 sigma < 0.95``, inconclusive otherwise.
    """
    band = SIGMA_FACTOR * q.stderr
    if abs(1.0 - q.value) <= max(EQUALITY_BAND, band):
        return Verdict.consistent_with_equality
    if q.value + band < STRICT_CEILING:
        return Verdict.strictly_below
    return Verdict.inconclusive


def _expected_length_drift(
    walks: DriftEstimate, rate: EntropyRate
) -> DriftEstimate:
    # The walk details (steps, discards) stay; the extrapolation step is
    # the uncertainty.
    value = rate.accelerated_drift
    return walks.model_copy(
        update={
            "value": value,
            "stderr": abs(rate.exact_drift - value),
            "samples": rate.max_n,
            "method": "exact_expected_length",
        }
    )


def _floored_weights(x: np.ndarray, w_min: float) -> list[float]:
    # The last logit is pinned to zero; the others are free parameters.
    logits = np.append(x, 0.0)
    shares = np.exp(logits - np.max(logits))
    shares /= shares.sum()
    weights = w_min + (1.0 - len(shares) * w_min) * shares
    return [float(w) for w in weights]


def _inner_objective(
    presentation: Presentation,
    measure: SymmetricMeasure,
    budgets: Budgets,
    volume: float,
) -> float | None:
    rate = entropy_rate(
        presentation,
        measure,
        budgets.inner_max_n,
        cap=budgets.element_cap,
        estimator=budgets.estimator,
    )
    speed = rate.exact_drift
    if speed <= 0.0 or volume <= 0.0:
        return None
    return rate.estimate.value / (speed * volume)


def _run_restart(
    args: tuple[Presentation, Budgets, float, int],
) -> list[tuple[list[float], float | None]]:
    presentation, budgets, volume, restart = args
    size = len(pair_codes(presentation))
    evaluations: list[tuple[list[float], float | None]] = []

    def evaluate(x: np.ndarray) -> float:
        weights = _floored_weights(x, budgets.w_min)
        measure = SymmetricMeasure.from_pair_weights(presentation, weights)
        objective = _inner_objective(presentation, measure, budgets, volume)
        evaluations.append((weights, objective))
        return math.inf if objective is None else -objective

    if restart == 0:
        start = np.zeros(size - 1)
    else:
        rng = np.random.default_rng(trial_seed(budgets.seed, restart))
        start = rng.normal(0.0, 1.0, size - 1)
    if size == 1:
        evaluate(start)
        return evaluations
    minimize(
        evaluate,
        start,
        method="Nelder-Mead",
        options={
            "maxfev": budgets.inner_evaluations,
            "xatol": 1e-3,
            "fatol": 1e-5,
        },
    )
    # Nelder-Mead may overshoot maxfev by a few evaluations.
    return evaluations[: budgets.inner_evaluations]


def _spec_seed(master_seed: int, spec: GeneratingSystemSpec) -> int:
    sequence = np.random.SeedSequence([master_seed, int(spec.digest[:8], 16)])
    return int(sequence.generate_state(1)[0])


def _compare_one(
    args: tuple[
        Presentation, GeneratingSystemSpec, MeasurePolicy, Budgets, int
    ],
) -> SystemEntry:
    base, spec, policy, budgets, restarts = args
    system = spec.build(
        base,
        radius=budgets.cutoff_radius,
        cap=budgets.element_cap,
        generation_depth=budgets.generation_depth,
    )
    system_budgets = budgets.for_system(
        system.radius, _spec_seed(budgets.seed, spec)
    )
    try:
        if policy is MeasurePolicy.optimized:
            report = optimize_measure(
                system, system_budgets, restarts=restarts
            ).report
        else:
            report = fundamental_report(
                system, SymmetricMeasure.uniform(system), system_budgets
            )
    except CutoffExceededError as e:
        raise UnreliableComparisonError(
            f"Walks on {system.tag} left the distance table: {e}"
        ) from e
    discarded = report.l.discarded
    if discarded > DISCARD_LIMIT * system_budgets.trials:
        raise UnreliableComparisonError(
            f"{discarded} of {system_budgets.trials} walks on {system.tag} "
            f"left the radius-{system.radius} distance table."
        )
    return SystemEntry(
        system=spec.label,
        words=spec.words,
        digest=spec.digest,
        verdict=report.verdict,
        q=report.q.value if report.q else None,
        report=report,
        discarded=discarded,
    )
