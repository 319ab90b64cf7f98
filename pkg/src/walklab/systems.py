"""User-supplied generating systems and their word metric."""

from __future__ import annotations

import hashlib
import logging
from collections.abc import Sequence
from pathlib import Path

from pydantic import BaseModel, ConfigDict, field_validator

from walklab.enumeration import DEFAULT_ELEMENT_CAP, SphereCounts
from walklab.exceptions import (
    CutoffExceededError,
    InvalidInputError,
    UsageError,
)
from walklab.ext.presentation import ElementKey, Presentation, Word

__all__ = [
    "DEFAULT_CUTOFF_RADIUS",
    "DEFAULT_GENERATION_DEPTH",
    "GeneratingSystemSpec",
    "SystemPresentation",
]

DEFAULT_CUTOFF_RADIUS = 10
"""Default radius of the distance table of an induced system."""

DEFAULT_GENERATION_DEPTH = 4
"""Default depth within which a system must reach every base generator."""


class GeneratingSystemSpec(BaseModel):
    """A finite set of words of a base presentation, used as generators.

    For groups the inverse of every word is added automatically.
    """

    model_config = ConfigDict(frozen=True)

    base: str
    """Spec string of the base presentation, such as ``free:2``."""

    words: tuple[str, ...]
    """Generator words in token syntax, such as ``("z1", "z2", "z1 z2")``."""

    @field_validator("words")
    @classmethod
    def validate_words(cls, v: tuple[str, ...]) -> tuple[str, ...]:
        words = tuple(" ".join(w.split()) for w in v)
        if not words or any(not w for w in words):
            raise ValueError("A generating system needs non-empty words.")
        return words

    @classmethod
    def from_file(cls, base: str, path: Path) -> GeneratingSystemSpec:
        """Read one word per line (blank lines and ``#`` comments ignored)."""
        try:
            text = path.read_text()
        except OSError as e:
            raise InvalidInputError(f"Cannot read {path}: {e}") from e
        words = [line.split("#", 1)[0].strip() for line in text.splitlines()]
        try:
            return cls(base=base, words=tuple(w for w in words if w))
        except ValueError as e:
            raise InvalidInputError(f"{path}: {e}") from e

    @property
    def label(self) -> str:
        """Human-readable label, such as ``{z1, z2, z1 z2}``."""
        return "{" + ", ".join(self.words) + "}"

    @property
    def digest(self) -> str:
        """Content hash of the normalized spec (independent of list order
        elsewhere).
        """
        text = self.base + "\n" + "\n".join(self.words)
        return hashlib.sha256(text.encode()).hexdigest()

    def build(
        self,
        base: Presentation,
        *,
        radius: int = DEFAULT_CUTOFF_RADIUS,
        cap: int = DEFAULT_ELEMENT_CAP,
        generation_depth: int = DEFAULT_GENERATION_DEPTH,
    ) -> SystemPresentation:
        """Build the induced presentation and check that it generates.

        Raises
        ------
        walklab.exceptions.InvalidInputError
            Raised if a word is trivial, or the system does not reach every
            base generator within ``generation_depth`` steps.
        """
        if base.tag != self.base:
            raise UsageError(
                f"System for {self.base} built over {base.tag}."
            )
        generators: list[ElementKey] = []
        seen: set[ElementKey] = set()
        for text in self.words:
            key = base.normalize(Word.parse(text)).codes
            if not key:
                raise InvalidInputError(
                    f"Generator {text!r} is the identity of {base.tag}."
                )
            inverse = base.invert(base.element(key)).codes
            if key in seen or inverse in seen:
                continue
            seen.update((key, inverse))
            generators.append(key)
        system = SystemPresentation(
            base,
            generators,
            label=self.label,
            radius=radius,
            cap=cap,
        )
        system.check_generates(generation_depth)
        return system


class SystemPresentation(Presentation):
    """A base group viewed through another symmetric generating system.

    Letter ``s_i`` (code ``2i - 2``) is the ``i``-th generator word and
    ``s_i^-1`` (code ``2i - 1``) its inverse. Elements keep the base
    presentation's normal forms; their word length is the distance in the
    new generators, read from a BFS distance table of bounded radius.

    Parameters
    ----------
    base
        The base group presentation.
    generators
        Canonical keys of the generator words, one per inverse pair.
    label
        Label used in the presentation tag.
    radius
        Radius of the distance table.
    cap
        Element budget of the distance table. The table stops at the last
        complete radius when the budget runs out.
    """

    name = "system"

    def __init__(
        self,
        base: Presentation,
        generators: Sequence[ElementKey],
        *,
        label: str,
        radius: int = DEFAULT_CUTOFF_RADIUS,
        cap: int = DEFAULT_ELEMENT_CAP,
    ) -> None:
        if not base.symmetric:
            raise UsageError(
                f"Generating systems need a group; {base.tag} is a semigroup."
            )
        if not generators:
            raise InvalidInputError("A generating system needs a generator.")
        super().__init__(len(generators), k_cap=len(generators))
        self._base = base
        self._label = label
        self._words: list[tuple[int, ...]] = []
        for key in generators:
            self._words.append(tuple(key))
            self._words.append(
                tuple(base.inverse_letter(c) for c in reversed(key))
            )
        self._distances: dict[ElementKey, int] = {}
        self._spheres = self._build_table(radius, cap)

    @property
    def tag(self) -> str:
        return f"{self._base.tag}{self._label}"

    @property
    def base(self) -> Presentation:
        return self._base

    @property
    def radius(self) -> int:
        """Radius of the (complete) distance table."""
        return self._spheres.depth

    @property
    def spheres(self) -> SphereCounts:
        """Sphere counts in the system's metric, up to `radius`."""
        return self._spheres

    def generator_word(self, code: int) -> tuple[int, ...]:
        """Base letter codes of a system letter."""
        return self._words[code]

    def append(self, letters: list[int], code: int) -> None:
        for base_code in self._words[code]:
            self._base.append(letters, base_code)

    def word_length(self, key: Sequence[int]) -> int:
        distance = self._distances.get(tuple(key))
        if distance is None:
            raise CutoffExceededError(
                f"Element {self._base.format_key(tuple(key))} lies beyond "
                f"radius {self.radius} of {self.tag}."
            )
        return distance

    def format_letter(self, code: int) -> str:
        index = code // 2 + 1
        return f"s{index}^-1" if code % 2 else f"s{index}"

    def format_key(self, key: ElementKey) -> str:
        return self._base.format_key(key)

    def check_generates(self, depth: int) -> None:
        """Check that every base generator lies within ``depth`` steps.

        Raises
        ------
        walklab.exceptions.InvalidInputError
            Raised if some base generator is not reached.
        """
        for code in self._base.codes:
            distance = self._distances.get((code,))
            if distance is None or distance > depth:
                raise InvalidInputError(
                    f"{self.tag} does not reach "
                    f"{self._base.format_letter(code)} within {depth} steps."
                )

    def _build_table(self, radius: int, cap: int) -> SphereCounts:
        logger = logging.getLogger(__name__)
        self._distances[()] = 0
        frontier: list[ElementKey] = [()]
        counts = [1]
        for level in range(1, radius + 1):
            next_frontier: list[ElementKey] = []
            for key in frontier:
                for code in self.codes:
                    neighbour = self.step(key, code)
                    if neighbour not in self._distances:
                        self._distances[neighbour] = level
                        next_frontier.append(neighbour)
            if len(self._distances) > cap:
                # Keep only the complete levels.
                for key in next_frontier:
                    del self._distances[key]
                logger.warning(
                    "Distance table of %s stopped at radius %d (budget %d)",
                    self.tag,
                    level - 1,
                    cap,
                )
                break
            counts.append(len(next_frontier))
            frontier = next_frontier
        return SphereCounts(counts=tuple(counts), presentation=self.tag)
