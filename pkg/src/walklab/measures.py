"""Step measures on generating systems and finite distributions."""

from __future__ import annotations

import logging
import math
from collections.abc import Callable, Mapping, Sequence
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from walklab.exceptions import InvalidInputError
from walklab.ext.presentation import ElementKey, Presentation

__all__ = [
    "MASS_TOLERANCE",
    "MEASURE_TOLERANCE",
    "Distribution",
    "SymmetricMeasure",
    "pair_codes",
]

MEASURE_TOLERANCE = 1e-12
"""Tolerance on the total mass and symmetry of a step measure."""

MASS_TOLERANCE = 1e-9
"""Tolerance on the total mass of a distribution (and of measure files)."""


class SymmetricMeasure(BaseModel):
    """A probability measure on the alphabet of a presentation.

    For group presentations the measure is symmetric, ``mu(g) = mu(g^-1)``.
    Semigroup measures only carry positive letters. The identity never has
    mass.
    """

    model_config = ConfigDict(frozen=True)

    presentation: str
    """Tag of the presentation."""

    symmetric: bool
    """Whether symmetry is required (group presentations)."""

    weights: dict[int, float]
    """Letter code to probability, for every letter with positive mass."""

    @field_validator("weights")
    @classmethod
    def validate_weights(cls, v: dict[int, float]) -> dict[int, float]:
        if not v:
            raise ValueError("A measure needs at least one letter.")
        if any(w < 0.0 or not math.isfinite(w) for w in v.values()):
            raise ValueError("Weights must be finite and non-negative.")
        total = math.fsum(v.values())
        if abs(total - 1.0) > MEASURE_TOLERANCE:
            raise ValueError(f"Weights sum to {total!r}, not 1.")
        return {code: w for code, w in sorted(v.items()) if w > 0.0}

    @model_validator(mode="after")
    def validate_symmetry(self) -> SymmetricMeasure:
        if self.symmetric:
            for code, w in self.weights.items():
                mirror = self.weights.get(code ^ 1, 0.0)
                if abs(mirror - w) > MEASURE_TOLERANCE:
                    raise ValueError(
                        f"Measure on {self.presentation} is not symmetric at "
                        f"letter code {code}."
                    )
        return self

    @classmethod
    def create(
        cls, presentation: Presentation, weights: Mapping[int, float]
    ) -> SymmetricMeasure:
        """Create a measure after checking its support against the alphabet.
        """
        for code in weights:
            if code not in presentation.codes:
                raise InvalidInputError(
                    f"Letter code {code} is not in the alphabet of "
                    f"{presentation.tag}."
                )
        try:
            return cls(
                presentation=presentation.tag,
                symmetric=presentation.symmetric,
                weights=dict(weights),
            )
        except ValueError as e:
            raise InvalidInputError(str(e)) from e

    @classmethod
    def uniform(cls, presentation: Presentation) -> SymmetricMeasure:
        """The uniform measure mu_S on the alphabet."""
        codes = presentation.codes
        return cls.create(presentation, {c: 1.0 / len(codes) for c in codes})

    @classmethod
    def from_pair_weights(
        cls,
        presentation: Presentation,
        pair_weights: Sequence[float],
    ) -> SymmetricMeasure:
        """Create a measure from one weight per generator.

        For groups each weight is split equally between a letter and its
        inverse. The weights are normalized to sum to one.
        """
        generators = pair_codes(presentation)
        if len(pair_weights) != len(generators):
            raise InvalidInputError(
                f"Expected {len(generators)} weights for "
                f"{presentation.tag}, got {len(pair_weights)}."
            )
        total = math.fsum(pair_weights)
        if total <= 0.0 or any(w < 0.0 for w in pair_weights):
            raise InvalidInputError(
                "Pair weights must be non-negative with a positive total."
            )
        weights: dict[int, float] = {}
        for code, w in zip(generators, pair_weights, strict=True):
            share = w / total
            if presentation.symmetric:
                weights[code] = share / 2.0
                weights[presentation.inverse_letter(code)] = share / 2.0
            else:
                weights[code] = share
        return cls.create(presentation, _renormalize(weights))

    @classmethod
    def from_file(
        cls, presentation: Presentation, path: Path
    ) -> SymmetricMeasure:
        """Read a measure file with lines ``generator weight``.

        For groups the weight given for a letter is attributed to its inverse
        pair and split equally within the pair. Blank lines and ``#``
        comments are ignored. Totals within 1e-9 of one are renormalized;
        anything further off is rejected.
        """
        logger = logging.getLogger(__name__)
        generators = pair_codes(presentation)
        pair_weights = dict.fromkeys(generators, 0.0)
        try:
            text = path.read_text()
        except OSError as e:
            raise InvalidInputError(f"Cannot read {path}: {e}") from e
        for lineno, line in enumerate(text.splitlines(), 1):
            content = line.split("#", 1)[0].strip()
            if not content:
                continue
            parts = content.split()
            if len(parts) != 2:
                raise InvalidInputError(
                    f"{path}:{lineno}: expected 'generator weight'."
                )
            code = presentation.parse_letter(parts[0])
            try:
                weight = float(parts[1])
            except ValueError as e:
                raise InvalidInputError(
                    f"{path}:{lineno}: {parts[1]!r} is not a number."
                ) from e
            if weight < 0.0:
                raise InvalidInputError(
                    f"{path}:{lineno}: weights must be non-negative."
                )
            pair = code & ~1 if presentation.symmetric else code
            pair_weights[pair] += weight
        total = math.fsum(pair_weights.values())
        if abs(total - 1.0) > MASS_TOLERANCE:
            raise InvalidInputError(
                f"Weights in {path} sum to {total!r}, not 1."
            )
        if total != 1.0:
            logger.info("Renormalized weights in %s (sum %r)", path, total)
        return cls.from_pair_weights(
            presentation, [pair_weights[c] for c in generators]
        )

    @property
    def codes(self) -> tuple[int, ...]:
        """Letters in the support, in code order."""
        return tuple(self.weights)

    @property
    def probabilities(self) -> np.ndarray:
        """Probabilities aligned with `codes`."""
        return np.array(list(self.weights.values()), dtype=float)

    def pair_weights(self, presentation: Presentation) -> list[float]:
        """One weight per generator (summing each inverse pair)."""
        result = []
        for code in pair_codes(presentation):
            w = self.weights.get(code, 0.0)
            if presentation.symmetric:
                w += self.weights.get(presentation.inverse_letter(code), 0.0)
            result.append(w)
        return result

    def entropy(self) -> float:
        """Entropy H(mu) of the step measure, in bits."""
        return -math.fsum(p * math.log2(p) for p in self.weights.values())

    def total_variation(self, other: SymmetricMeasure) -> float:
        """Total-variation distance to another measure."""
        letters = set(self.weights) | set(other.weights)
        return 0.5 * math.fsum(
            abs(self.weights.get(c, 0.0) - other.weights.get(c, 0.0))
            for c in letters
        )

    def describe(self, presentation: Presentation) -> dict[str, float]:
        """Weights keyed by letter tokens."""
        return {
            presentation.format_letter(code): w
            for code, w in self.weights.items()
        }


@dataclass(frozen=True)
class Distribution:
    """A finite probability table over elements, such as mu^{*n}."""

    table: dict[ElementKey, float]
    """Element key to probability."""

    steps: int
    """Number of convolution steps n."""

    presentation: str
    """Tag of the presentation."""

    @property
    def support_size(self) -> int:
        return len(self.table)

    @property
    def total_mass(self) -> float:
        return math.fsum(self.table.values())

    def __getitem__(self, key: ElementKey) -> float:
        return self.table.get(key, 0.0)

    def mass_where(self, predicate: Callable[[ElementKey], bool]) -> float:
        """Total probability of the elements satisfying a predicate."""
        return math.fsum(p for key, p in self.table.items() if predicate(key))

    def expected_length(self, length: Callable[[ElementKey], int]) -> float:
        """Expected word length under the distribution."""
        return math.fsum(p * length(key) for key, p in self.table.items())


def pair_codes(presentation: Presentation) -> tuple[int, ...]:
    """One letter per inverse pair (the positive letter), or every letter
    of a semigroup.
    """
    if presentation.symmetric:
        return tuple(c for c in presentation.codes if c % 2 == 0)
    return presentation.codes


def _renormalize(weights: dict[int, float]) -> dict[int, float]:
    total = math.fsum(weights.values())
    return {code: w / total for code, w in weights.items()}
