"""Convolution powers, entropy, drift and the law of large numbers for
lengths of random walks.

All logarithms are binary, so entropies are in bits.
"""

from __future__ import annotations

import logging
import math
from collections import defaultdict
from collections.abc import Iterator, Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from enum import Enum

import numpy as np
from pydantic import BaseModel, ConfigDict

from walklab.enumeration import DEFAULT_ELEMENT_CAP
from walklab.estimates import EstimateCI
from walklab.exceptions import (
    BudgetExceededError,
    CutoffExceededError,
    InsufficientDepthError,
    UndefinedDriftError,
    UsageError,
)
from walklab.ext.presentation import ElementKey, Presentation
from walklab.measures import MASS_TOLERANCE, Distribution, SymmetricMeasure

__all__ = [
    "DriftEstimate",
    "EntropyEstimator",
    "EntropyRate",
    "LlnResult",
    "WalkTrajectory",
    "convolution_powers",
    "convolve_power",
    "drift",
    "entropy",
    "entropy_rate",
    "lln_check",
    "sample_walk",
    "trial_seed",
]

FIT_WINDOW = 5
"""Number of trailing entropies used by the log-corrected fit."""

SPREAD_WINDOW = 3
"""Number of trailing increments whose spread is the reported uncertainty."""

DIFFUSIVE_SCALE = 2.0
"""Zero-drift walks have ``E l(X_n) / sqrt(n)`` below this constant."""

DIFFUSIVE_MIN_STEPS = 100
"""Shortest walk span for which the diffusive test is applied."""


class EntropyEstimator(str, Enum):
    """Headline estimator of the entropy rate."""

    log_corrected = "log_corrected"
    """Fit of ``H_n = h n + a log2 n + c`` over the last entropies."""

    increment = "increment"
    """The last increment ``H_n - H_{n-1}``."""

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class WalkTrajectory:
    """Word lengths along one sampled walk."""

    seed: int
    """Seed of the walk (the master seed for trials of a drift run)."""

    lengths: tuple[int, ...]
    """``l(X_1), ..., l(X_n)``."""

    trial: int | None = None
    """Trial number, when the seed was spawned from a master seed."""

    @property
    def steps(self) -> int:
        return len(self.lengths)


class EntropyRate(BaseModel):
    """Exact entropies of convolution powers and the rate estimate."""

    model_config = ConfigDict(frozen=True)

    estimate: EstimateCI
    """Headline estimate of h in bits per step."""

    increment: EstimateCI
    """Last increment with the spread of the last increments."""

    entropies: list[float]
    """``H(mu^{*n})`` for ``n = 1..max_n``."""

    increments: list[float]
    """``H(mu^{*n}) - H(mu^{*(n-1)})`` for ``n = 1..max_n``."""

    cesaro: list[float]
    """``H(mu^{*n}) / n`` for ``n = 1..max_n``."""

    expected_lengths: list[float]
    """``E l(X_n)`` for ``n = 1..max_n``."""

    identity_mass: list[float]
    """``mu^{*n}(e)`` for ``n = 1..max_n``."""

    upper_envelope: float
    """``min_n H(mu^{*n}) / n``, a rigorous upper bound on h."""

    truncated: bool
    """Whether the element budget stopped the sequence early."""

    @property
    def max_n(self) -> int:
        return len(self.entropies)

    @property
    def even_cesaro(self) -> list[float]:
        """Cesàro ratios at even n."""
        return self.cesaro[1::2]

    @property
    def odd_cesaro(self) -> list[float]:
        """Cesàro ratios at odd n."""
        return self.cesaro[0::2]

    @property
    def exact_drift(self) -> float:
        """Speed ``(E l(X_N) - E l(X_{N-2})) / 2`` from the exact powers.

        Averaging two steps cancels the parity oscillation of walks on
        bipartite Cayley graphs.
        """
        lengths = self.expected_lengths
        if len(lengths) < 3:
            return lengths[-1] - lengths[-2]
        return (lengths[-1] - lengths[-3]) / 2.0

    @property
    def accelerated_drift(self) -> float:
        """`exact_drift` extrapolated with Aitken's delta-squared process.

        The two-step speeds ending at ``N - 4``, ``N - 2`` and ``N`` approach
        the drift from above, roughly geometrically on non-amenable groups.
        Falls back to `exact_drift` below seven expected lengths, or when the
        speeds do not contract.
        """
        lengths = self.expected_lengths
        if len(lengths) < 7:
            return self.exact_drift
        d0, d1, d2 = (
            (lengths[i] - lengths[i - 2]) / 2.0 for i in (-5, -3, -1)
        )
        first, second = d1 - d0, d2 - d1
        if first * second <= 0.0 or abs(second) >= abs(first):
            return d2
        return d2 - second**2 / (second - first)


class DriftEstimate(EstimateCI):
    """Drift estimate with the details of the sampled walks."""

    steps: int
    """Walk length n."""

    burn_in: int = 0
    """Length subtracted from the walk, see `drift`."""

    sqrt_scaled: float
    """Mean of ``l(X_n) / sqrt(n)`` (diffusive scaling)."""

    discarded: int = 0
    """Trials discarded because the walk left a distance table."""

    def vanishes(self) -> bool:
        """Whether the drift is indistinguishable from zero.

        Word lengths are non-negative, so the mean speed of a zero-drift walk
        is positive at any finite n. Such walks spread like ``sqrt(n)``: for
        spans of at least `DIFFUSIVE_MIN_STEPS` steps, a lower confidence
        bound below ``DIFFUSIVE_SCALE / sqrt(n - burn_in)`` counts as zero.
        """
        if not self.excludes_zero():
            return True
        span = self.steps - self.burn_in
        return span >= DIFFUSIVE_MIN_STEPS and self.low <= (
            DIFFUSIVE_SCALE / math.sqrt(span)
        )


class LlnResult(BaseModel):
    """Mass of the walk whose length is within ``eps`` of ``l_ref * n``."""

    model_config = ConfigDict(frozen=True)

    fraction: float
    """The mass ``mu^{*n}(g : |l(g) / (l_ref n) - 1| <= eps)``."""

    method: str
    """``exact`` or ``monte_carlo``."""

    steps: int
    eps: float
    l_ref: float

    trials: int = 0
    """Monte Carlo trials (zero for the exact method)."""

    @property
    def bound(self) -> float:
        """The law-of-large-numbers lower bound ``1 - eps``."""
        return 1.0 - self.eps

    @property
    def satisfied(self) -> bool:
        return self.fraction >= self.bound


def convolution_powers(
    presentation: Presentation,
    measure: SymmetricMeasure,
    max_steps: int,
    *,
    cap: int = DEFAULT_ELEMENT_CAP,
) -> Iterator[Distribution]:
    """Yield the exact convolution powers ``mu^{*1}, ..., mu^{*max_steps}``.

    ``mu^{*(t+1)}(h) = sum_{g s = h} mu^{*t}(g) mu(s)``, aggregated with the
    presentation's right multiplication.

    Raises
    ------
    walklab.exceptions.BudgetExceededError
        Raised when a power would hold more than ``cap`` elements. ``partial``
        is the last complete distribution and ``completed`` its step count.
    """
    logger = logging.getLogger(__name__)
    _check_measure(presentation, measure)
    if max_steps < 1:
        raise UsageError(f"Convolutions need n >= 1 (got {max_steps}).")
    letters = list(measure.weights.items())
    step = presentation.step
    table: dict[ElementKey, float] = {(): 1.0}
    current: Distribution | None = None
    for t in range(1, max_steps + 1):
        extended: defaultdict[ElementKey, float] = defaultdict(float)
        for key, p in table.items():
            for code, w in letters:
                extended[step(key, code)] += p * w
            if len(extended) > cap:
                raise _budget_error(presentation, cap, t, current)
        table = dict(extended)
        total = math.fsum(table.values())
        if abs(total - 1.0) > MASS_TOLERANCE:
            raise RuntimeError(
                f"Convolution step {t} of {presentation.tag} lost mass "
                f"(total {total!r})."
            )
        current = Distribution(
            table=table, steps=t, presentation=presentation.tag
        )
        logger.debug(
            "%s convolution step %d: support %d",
            presentation.tag,
            t,
            len(table),
        )
        yield current


def convolve_power(
    presentation: Presentation,
    measure: SymmetricMeasure,
    steps: int,
    *,
    cap: int = DEFAULT_ELEMENT_CAP,
) -> Distribution:
    """The exact n-fold convolution ``mu^{*n}``."""
    result: Distribution | None = None
    for result in convolution_powers(presentation, measure, steps, cap=cap):
        pass
    if result is None:
        raise UsageError(f"Convolutions need n >= 1 (got {steps}).")
    return result


def entropy(distribution: Distribution) -> float:
    """Shannon entropy of a distribution in bits."""
    p = np.fromiter(distribution.table.values(), dtype=float)
    p = p[p > 0.0]
    return float(-np.sum(p * np.log2(p)))


def entropy_rate(
    presentation: Presentation,
    measure: SymmetricMeasure,
    max_n: int,
    *,
    cap: int = DEFAULT_ELEMENT_CAP,
    estimator: EntropyEstimator = EntropyEstimator.log_corrected,
) -> EntropyRate:
    """Estimate the entropy h(G, mu) from exact convolution powers.

    The exact sequence ``H(mu^{*n})`` is computed for ``n <= max_n`` or until
    the element budget runs out. The increments are non-increasing and
    bounded below by h, and ``min_n H(mu^{*n}) / n`` bounds h from above;
    every reported estimate is clipped to both envelopes.

    Raises
    ------
    walklab.exceptions.InsufficientDepthError
        Raised if the budget allows fewer than two exact steps.
    """
    logger = logging.getLogger(__name__)
    if max_n < 2:
        raise UsageError(f"The entropy rate needs max_n >= 2 (got {max_n}).")
    entropies: list[float] = []
    expected_lengths: list[float] = []
    identity_mass: list[float] = []
    truncated = False
    length = presentation.word_length
    try:
        for d in convolution_powers(presentation, measure, max_n, cap=cap):
            entropies.append(entropy(d))
            expected_lengths.append(d.expected_length(length))
            identity_mass.append(d[()])
    except BudgetExceededError as e:
        truncated = True
        logger.info(
            "Entropy sequence of %s stopped at n=%d: %s",
            presentation.tag,
            e.completed,
            e,
        )
    if len(entropies) < 2:
        raise InsufficientDepthError(
            f"The element budget allows only {len(entropies)} exact "
            f"convolution steps of {presentation.tag}; at least 2 are needed."
        )

    n_max = len(entropies)
    ns = np.arange(1, n_max + 1)
    h = np.array(entropies)
    increments = np.diff(h, prepend=0.0)
    cesaro = h / ns
    upper = float(np.min(cesaro))

    tail = increments[-SPREAD_WINDOW:]
    increment = EstimateCI(
        value=max(0.0, min(float(increments[-1]), upper)),
        stderr=float(np.ptp(tail)),
        samples=n_max,
        method="exact_increment_spread",
    )
    if estimator is EntropyEstimator.increment or n_max < 3:
        estimate = increment
    else:
        estimate = _log_corrected(
            ns, h, ceiling=min(float(increments[-1]), upper)
        )

    return EntropyRate(
        estimate=estimate,
        increment=increment,
        entropies=[float(x) for x in h],
        increments=[float(x) for x in increments],
        cesaro=[float(x) for x in cesaro],
        expected_lengths=expected_lengths,
        identity_mass=identity_mass,
        upper_envelope=upper,
        truncated=truncated,
    )


def sample_walk(
    presentation: Presentation,
    measure: SymmetricMeasure,
    steps: int,
    seed: int,
) -> WalkTrajectory:
    """Sample one walk and record the word length after every step.

    Letters are drawn i.i.d. from the measure and the running product is
    kept as a normal form. The trajectory is a deterministic function of the
    seed.
    """
    _check_measure(presentation, measure)
    if steps < 1:
        raise UsageError(f"A walk needs at least one step (got {steps}).")
    rng = np.random.default_rng(seed)
    return WalkTrajectory(
        seed=seed, lengths=_walk_lengths(presentation, measure, steps, rng)
    )


def trial_seed(master_seed: int, trial: int) -> np.random.SeedSequence:
    """Counter-based seed of one trial, independent of scheduling."""
    return np.random.SeedSequence(entropy=master_seed, spawn_key=(trial,))


def drift(
    presentation: Presentation,
    measure: SymmetricMeasure,
    steps: int,
    trials: int,
    master_seed: int,
    *,
    burn_in: int = 0,
    workers: int = 1,
) -> DriftEstimate:
    """Estimate the drift l(mu) by Monte Carlo.

    Each trial contributes ``(l(X_n) - l(X_b)) / (n - b)`` where ``b`` is the
    burn-in (zero gives the plain ``l(X_n) / n``). Trial seeds are spawned
    from ``master_seed`` by trial number, so the result does not depend on
    the number of workers.

    Trials whose walk leaves a distance table (for induced generating
    systems) are discarded and counted.
    """
    if trials < 2:
        raise UsageError(f"Drift needs at least 2 trials (got {trials}).")
    if not 0 <= burn_in < steps:
        raise UsageError(
            f"Burn-in must lie in [0, {steps}) (got {burn_in})."
        )
    finals = _trial_lengths(
        presentation,
        measure,
        steps,
        trials,
        master_seed,
        checkpoints=(burn_in, steps),
        workers=workers,
    )
    kept = finals[~np.isnan(finals[:, 1])]
    if len(kept) < 2:
        raise CutoffExceededError(
            f"Fewer than 2 of {trials} walks on {presentation.tag} stayed "
            "inside the distance table.",
            completed=len(kept),
        )
    speeds = (kept[:, 1] - kept[:, 0]) / (steps - burn_in)
    return DriftEstimate(
        value=float(np.mean(speeds)),
        stderr=float(np.std(speeds, ddof=1) / math.sqrt(len(speeds))),
        samples=len(speeds),
        method="monte_carlo_mean",
        units="length/step",
        steps=steps,
        burn_in=burn_in,
        sqrt_scaled=float(np.mean(kept[:, 1]) / math.sqrt(steps)),
        discarded=trials - len(kept),
    )


def lln_check(
    presentation: Presentation,
    measure: SymmetricMeasure,
    steps: int,
    eps: float,
    l_ref: float | None = None,
    *,
    trials: int = 10_000,
    master_seed: int = 0,
    exact_max_n: int = 10,
    cap: int = DEFAULT_ELEMENT_CAP,
    workers: int = 1,
) -> LlnResult:
    """Measure how much of mu^{*n} has length within ``eps`` of ``l_ref n``.

    The mass is exact when ``steps <= exact_max_n`` and the convolution fits
    the budget, otherwise it is a Monte Carlo fraction over ``trials`` walks.
    Without ``l_ref`` the drift of the same measure is estimated first.

    Raises
    ------
    walklab.exceptions.UndefinedDriftError
        Raised if the reference drift is not positive.
    """
    if eps <= 0.0:
        raise UsageError(f"eps must be positive (got {eps}).")
    if l_ref is None:
        reference = drift(
            presentation,
            measure,
            steps,
            min(trials, 200),
            master_seed,
            workers=workers,
        )
        if reference.vanishes():
            raise UndefinedDriftError(
                f"The drift of {presentation.tag} is not distinguishable "
                f"from zero ({reference.value:.4f} ± "
                f"{reference.half_width:.4f})."
            )
        l_ref = reference.value
    if l_ref <= 0.0:
        raise UndefinedDriftError(
            f"The law of large numbers needs a positive drift (got {l_ref})."
        )
    target = l_ref * steps

    def in_band(length: float) -> bool:
        return abs(length / target - 1.0) <= eps

    if steps <= exact_max_n:
        try:
            d = convolve_power(presentation, measure, steps, cap=cap)
        except BudgetExceededError:
            pass
        else:
            inside = d.mass_where(
                lambda key: in_band(presentation.word_length(key))
            )
            outside = d.mass_where(
                lambda key: not in_band(presentation.word_length(key))
            )
            # A band holding the whole support gives exactly 1.
            fraction = 1.0 if outside == 0.0 else inside / (inside + outside)
            return LlnResult(
                fraction=fraction,
                method="exact",
                steps=steps,
                eps=eps,
                l_ref=l_ref,
            )

    finals = _trial_lengths(
        presentation,
        measure,
        steps,
        trials,
        master_seed,
        checkpoints=(steps,),
        workers=workers,
    )[:, 0]
    finals = finals[~np.isnan(finals)]
    if len(finals) == 0:
        raise CutoffExceededError(
            f"Every walk on {presentation.tag} left the distance table."
        )
    hits = sum(1 for length in finals if in_band(float(length)))
    return LlnResult(
        fraction=hits / len(finals),
        method="monte_carlo",
        steps=steps,
        eps=eps,
        l_ref=l_ref,
        trials=len(finals),
    )


def _check_measure(
    presentation: Presentation, measure: SymmetricMeasure
) -> None:
    if measure.presentation != presentation.tag:
        raise UsageError(
            f"Measure on {measure.presentation} used with {presentation.tag}."
        )


def _budget_error(
    presentation: Presentation,
    cap: int,
    step: int,
    current: Distribution | None,
) -> BudgetExceededError:
    return BudgetExceededError(
        f"Convolution of {presentation.tag} exceeded {cap} elements at "
        f"step {step}.",
        partial=current,
        completed=step - 1,
    )


def _log_corrected(
    ns: np.ndarray, h: np.ndarray, *, ceiling: float
) -> EstimateCI:
    # Fits ending at n_max, n_max - 1 and n_max - 2 (when at least three
    # points remain); their spread is the reported uncertainty.
    fits = []
    for end in range(len(ns), 2, -1):
        start = max(0, end - FIT_WINDOW)
        if end - start < 3 or len(fits) == SPREAD_WINDOW:
            break
        x = ns[start:end].astype(float)
        design = np.column_stack([x, np.log2(x), np.ones_like(x)])
        coefficients, *_ = np.linalg.lstsq(design, h[start:end], rcond=None)
        fits.append(float(coefficients[0]))
    value = min(max(fits[0], 0.0), ceiling)
    return EstimateCI(
        value=max(0.0, value),
        stderr=float(np.ptp(fits)) if len(fits) > 1 else 0.0,
        samples=len(ns),
        method="exact_log_corrected",
    )


def _walk_lengths(
    presentation: Presentation,
    measure: SymmetricMeasure,
    steps: int,
    rng: np.random.Generator,
) -> tuple[int, ...]:
    codes = np.array(measure.codes)
    draws = rng.choice(codes, size=steps, p=measure.probabilities)
    letters: list[int] = []
    append = presentation.append
    word_length = presentation.word_length
    lengths = []
    for code in draws.tolist():
        append(letters, code)
        lengths.append(word_length(letters))
    return tuple(lengths)


def _trial_checkpoints(
    args: tuple[Presentation, SymmetricMeasure, int, int, int, Sequence[int]],
) -> list[float]:
    presentation, measure, steps, master_seed, trial, checkpoints = args
    rng = np.random.default_rng(trial_seed(master_seed, trial))
    try:
        lengths = _walk_lengths(presentation, measure, steps, rng)
    except CutoffExceededError:
        return [math.nan] * len(checkpoints)
    # Position 0 of a checkpoint list is the identity (length 0).
    return [float(lengths[c - 1]) if c > 0 else 0.0 for c in checkpoints]


def _trial_lengths(
    presentation: Presentation,
    measure: SymmetricMeasure,
    steps: int,
    trials: int,
    master_seed: int,
    *,
    checkpoints: Sequence[int],
    workers: int,
) -> np.ndarray:
    _check_measure(presentation, measure)
    if steps < 1:
        raise UsageError(f"A walk needs at least one step (got {steps}).")
    jobs = [
        (presentation, measure, steps, master_seed, trial, tuple(checkpoints))
        for trial in range(trials)
    ]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as executor:
            rows = list(
                executor.map(
                    _trial_checkpoints,
                    jobs,
                    chunksize=max(1, trials // (4 * workers)),
                )
            )
    else:
        rows = [_trial_checkpoints(job) for job in jobs]
    return np.array(rows, dtype=float).reshape(trials, len(checkpoints))
