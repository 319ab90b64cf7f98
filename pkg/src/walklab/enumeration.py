"""Cayley-ball enumeration, path counts and logarithmic volume."""

from __future__ import annotations

import csv
import logging
import math
from collections import defaultdict
from pathlib import Path

import numpy as np
from numpy.polynomial import Polynomial
from pydantic import BaseModel, ConfigDict, field_validator
from scipy.optimize import bisect

from walklab.estimates import VolumeEstimate, VolumeMethod
from walklab.exceptions import (
    BudgetExceededError,
    DegenerateGrowthError,
    UsageError,
)
from walklab.ext.presentation import ElementKey, Presentation

__all__ = [
    "DEFAULT_ELEMENT_CAP",
    "MoebiusPolynomial",
    "SphereCounts",
    "cesaro_volume",
    "count_paths",
    "count_paths_cumulative",
    "enumerate_ball",
    "log_volume",
    "moebius_polynomial",
    "semigroup_spheres_from_moebius",
]

DEFAULT_ELEMENT_CAP = 10_000_000
"""Default budget on the number of stored elements."""

ROOT_TOLERANCE = 1e-12
"""Absolute tolerance of the Möbius root bisection."""

RATIO_WINDOW = 3
"""Default number of successive sphere ratios averaged by the fit."""


class SphereCounts(BaseModel):
    """Exact sphere sizes |W_0|, |W_1|, ..., |W_N| of a presentation."""

    model_config = ConfigDict(frozen=True)

    counts: tuple[int, ...]
    """Sphere sizes indexed by radius."""

    presentation: str
    """Tag of the presentation, such as ``free:2``."""

    @field_validator("counts")
    @classmethod
    def validate_counts(cls, v: tuple[int, ...]) -> tuple[int, ...]:
        if not v or v[0] != 1:
            raise ValueError("Sphere counts must start with |W_0| = 1.")
        if any(c < 0 for c in v):
            raise ValueError("Sphere counts must be non-negative.")
        return v

    @property
    def depth(self) -> int:
        """Largest enumerated radius N."""
        return len(self.counts) - 1

    @property
    def balls(self) -> tuple[int, ...]:
        """Ball sizes |W_{<=n}|."""
        return tuple(int(b) for b in np.cumsum(self.counts))

    def ball(self, n: int) -> int:
        """Size of the ball of radius ``n``."""
        return sum(self.counts[: n + 1])

    def sphere_entropy(self, n: int) -> float:
        """Entropy in bits of the uniform measure m_n on the sphere."""
        return math.log2(self.counts[n]) if self.counts[n] else 0.0

    def ball_entropy(self, n: int) -> float:
        """Entropy in bits of the uniform measure m_{<=n} on the ball."""
        return math.log2(self.ball(n))

    def is_submultiplicative(self) -> bool:
        """Check B(n + m) <= B(n) B(m) for every pair inside the range."""
        balls = self.balls
        depth = self.depth
        return all(
            balls[n + m] <= balls[n] * balls[m]
            for n in range(depth + 1)
            for m in range(depth + 1 - n)
        )

    def write_csv(self, path: Path) -> None:
        """Write the columns ``n``, ``sphere`` and ``ball`` to a CSV file."""
        with path.open("w", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(["n", "sphere", "ball"])
            for n, (sphere, ball) in enumerate(
                zip(self.counts, self.balls, strict=True)
            ):
                writer.writerow([n, sphere, ball])


class MoebiusPolynomial(BaseModel):
    """Clique polynomial of the commutation graph of LF+_k.

    The growth series of the locally free semigroup is ``1 / mu(t)``.
    """

    model_config = ConfigDict(frozen=True)

    k: int
    """Number of generators."""

    coefficients: tuple[int, ...]
    """Coefficient of ``t**j`` at position ``j``."""

    def __call__(self, t: float) -> float:
        return float(Polynomial(self.coefficients)(t))

    def smallest_root(self) -> float:
        """Smallest positive root in (0, 1], located by bisection.

        Raises
        ------
        walklab.exceptions.DegenerateGrowthError
            Raised if the polynomial has no root in (0, 1].
        """
        polynomial = Polynomial(self.coefficients)
        grid = np.linspace(0.0, 1.0, 2049)
        values = polynomial(grid)
        for left, right, f_left, f_right in zip(
            grid[:-1], grid[1:], values[:-1], values[1:], strict=True
        ):
            if f_right == 0.0:
                return float(right)
            if f_left > 0.0 > f_right:
                return float(
                    bisect(polynomial, left, right, xtol=ROOT_TOLERANCE)
                )
        raise DegenerateGrowthError(
            f"Möbius polynomial for k={self.k} has no root in (0, 1]."
        )


def moebius_polynomial(k: int) -> MoebiusPolynomial:
    """Möbius polynomial ``sum_j (-1)^j C(k - j + 1, j) t^j``.

    ``C(k - j + 1, j)`` counts the ``j``-subsets of ``{1..k}`` whose indices
    pairwise differ by at least two (the commuting cliques).
    """
    if k < 1:
        raise UsageError(f"The Möbius polynomial needs k >= 1 (got {k}).")
    coefficients = [
        (-1) ** j * math.comb(k - j + 1, j) for j in range((k + 1) // 2 + 1)
    ]
    while len(coefficients) > 1 and coefficients[-1] == 0:
        coefficients.pop()
    return MoebiusPolynomial(k=k, coefficients=tuple(coefficients))


def semigroup_spheres_from_moebius(
    polynomial: MoebiusPolynomial, depth: int
) -> SphereCounts:
    """Sphere counts of LF+_k from the recurrence of ``1 / mu(t)``.

    ``|W_n| = -sum_{j>=1} mu_j |W_{n-j}|`` with ``|W_0| = 1``.
    """
    if depth < 0:
        raise UsageError(f"Depth must be non-negative (got {depth}).")
    mu = polynomial.coefficients
    counts = [1]
    for n in range(1, depth + 1):
        order = min(n, len(mu) - 1)
        counts.append(-sum(mu[j] * counts[n - j] for j in range(1, order + 1)))
    return SphereCounts(
        counts=tuple(counts), presentation=f"lfsemigroup:{polynomial.k}"
    )


def enumerate_ball(
    presentation: Presentation,
    depth: int,
    *,
    cap: int = DEFAULT_ELEMENT_CAP,
    store: dict[ElementKey, int] | None = None,
) -> SphereCounts:
    """Enumerate the Cayley ball of radius ``depth`` by BFS over normal forms.

    Parameters
    ----------
    presentation
        The presentation to enumerate.
    depth
        Largest radius N.
    cap
        Budget on the number of discovered elements.
    store
        Optional dictionary that receives every discovered element key with
        its distance from the identity.

    Returns
    -------
    SphereCounts
        The exact sphere sizes for radii ``0..depth``.

    Raises
    ------
    walklab.exceptions.BudgetExceededError
        Raised if more than ``cap`` elements are discovered. The exception's
        ``partial`` attribute holds the `SphereCounts` of the completed
        levels.
    """
    logger = logging.getLogger(__name__)
    if depth < 0:
        raise UsageError(f"Depth must be non-negative (got {depth}).")

    distances: dict[ElementKey, int] = {} if store is None else store
    distances[()] = 0
    frontier: list[ElementKey] = [()]
    counts = [1]
    codes = presentation.codes
    for level in range(1, depth + 1):
        next_frontier: list[ElementKey] = []
        for key in frontier:
            for code in codes:
                neighbour = presentation.step(key, code)
                if neighbour in distances:
                    continue
                if presentation.word_length(neighbour) != level:
                    raise RuntimeError(
                        f"BFS level {level} disagrees with the length of "
                        f"{presentation.format_key(neighbour)} in "
                        f"{presentation.tag}."
                    )
                distances[neighbour] = level
                next_frontier.append(neighbour)
            if len(distances) > cap:
                logger.info(
                    "Element budget %d exhausted at radius %d of %s",
                    cap,
                    level,
                    presentation.tag,
                )
                raise BudgetExceededError(
                    f"Ball enumeration of {presentation.tag} exceeded "
                    f"{cap} elements at radius {level}.",
                    partial=SphereCounts(
                        counts=tuple(counts), presentation=presentation.tag
                    ),
                    completed=level - 1,
                )
        counts.append(len(next_frontier))
        frontier = next_frontier
        logger.debug(
            "%s radius %d: %d elements", presentation.tag, level, counts[-1]
        )
    return SphereCounts(counts=tuple(counts), presentation=presentation.tag)


def count_paths(
    presentation: Presentation,
    steps: int,
    *,
    cap: int = DEFAULT_ELEMENT_CAP,
) -> dict[ElementKey, int]:
    """Count products of exactly ``steps`` alphabet letters per element.

    Returns a table ``g -> c_n(g)`` keyed by canonical element keys, so that
    ``mu_S^{*n}(g) = c_n(g) / |S|^n`` for the uniform measure mu_S.

    Raises
    ------
    walklab.exceptions.BudgetExceededError
        Raised if the table outgrows ``cap``; ``partial`` holds the last
        complete table.
    """
    if steps < 0:
        raise UsageError(f"Step count must be non-negative (got {steps}).")
    table: dict[ElementKey, int] = {(): 1}
    for t in range(1, steps + 1):
        table = _extend_paths(presentation, table, cap=cap, completed=t - 1)
    return table


def count_paths_cumulative(
    presentation: Presentation,
    steps: int,
    *,
    cap: int = DEFAULT_ELEMENT_CAP,
) -> dict[ElementKey, int]:
    """Count products of *at most* ``steps`` letters per element."""
    if steps < 0:
        raise UsageError(f"Step count must be non-negative (got {steps}).")
    table: dict[ElementKey, int] = {(): 1}
    cumulative: defaultdict[ElementKey, int] = defaultdict(int, table)
    for t in range(1, steps + 1):
        table = _extend_paths(presentation, table, cap=cap, completed=t - 1)
        for key, count in table.items():
            cumulative[key] += count
    return dict(cumulative)


def _extend_paths(
    presentation: Presentation,
    table: dict[ElementKey, int],
    *,
    cap: int,
    completed: int,
) -> dict[ElementKey, int]:
    extended: defaultdict[ElementKey, int] = defaultdict(int)
    for key, count in table.items():
        for code in presentation.codes:
            extended[presentation.step(key, code)] += count
        if len(extended) > cap:
            raise BudgetExceededError(
                f"Path table of {presentation.tag} exceeded {cap} entries "
                f"at step {completed + 1}.",
                partial=table,
                completed=completed,
            )
    return dict(extended)


def log_volume(
    source: SphereCounts | MoebiusPolynomial | Presentation,
    *,
    window: int = RATIO_WINDOW,
) -> VolumeEstimate:
    """Estimate the logarithmic volume v in bits per step.

    Parameters
    ----------
    source
        Sphere counts (``sphere_ratio_fit``), a Möbius polynomial
        (``moebius_root``), or a presentation with a closed form
        (``closed_form``: free and free abelian groups, and the locally free
        semigroup through its Möbius polynomial).
    window
        Number of successive sphere ratios averaged by the fit.

    Raises
    ------
    walklab.exceptions.DegenerateGrowthError
        Raised if the sphere counts are too short or vanish in the window.
    walklab.exceptions.UsageError
        Raised for a presentation without a closed form.
    """
    if isinstance(source, SphereCounts):
        return _sphere_ratio_fit(source, window=window)
    if isinstance(source, MoebiusPolynomial):
        root = source.smallest_root()
        return VolumeEstimate(
            value=max(0.0, -math.log2(root)), method=VolumeMethod.moebius_root
        )
    if source.name == "free":
        return VolumeEstimate(
            value=math.log2(2 * source.k - 1), method=VolumeMethod.closed_form
        )
    if source.name == "abelian":
        return VolumeEstimate(value=0.0, method=VolumeMethod.closed_form)
    if source.name == "lfsemigroup":
        return log_volume(moebius_polynomial(source.k))
    raise UsageError(
        f"{source.tag} has no closed-form volume; enumerate its spheres."
    )


def cesaro_volume(counts: SphereCounts) -> VolumeEstimate:
    """The estimate log2 |W_N| / N at the largest radius."""
    if counts.depth < 1 or counts.counts[-1] == 0:
        raise DegenerateGrowthError(
            f"Sphere counts of {counts.presentation} cannot give a Cesàro "
            "estimate."
        )
    n = counts.depth
    return VolumeEstimate(
        value=max(0.0, math.log2(counts.counts[n]) / n),
        method=VolumeMethod.cesaro,
        window=(n, n),
    )


def _sphere_ratio_fit(counts: SphereCounts, *, window: int) -> VolumeEstimate:
    if counts.depth < 2:
        raise DegenerateGrowthError(
            f"At least 3 sphere counts are needed (got {counts.depth + 1})."
        )
    last = counts.depth
    # The ratio |W_1| / |W_0| is skipped: it is |S|, not a growth ratio.
    first = max(2, last - window + 1)
    tail = counts.counts[first - 1 : last + 1]
    if any(c == 0 for c in tail):
        raise DegenerateGrowthError(
            f"Sphere counts of {counts.presentation} vanish in the fit window."
        )
    rates = np.log2(np.array(tail[1:], dtype=float)) - np.log2(
        np.array(tail[:-1], dtype=float)
    )
    return VolumeEstimate(
        value=max(0.0, float(np.mean(rates))),
        method=VolumeMethod.sphere_ratio_fit,
        window=(first, last),
        spread=float(np.std(rates)),
    )
