"""Value types for generators, words and normal forms.

Letters are stored as integer *codes*: generator ``z_i`` has code
``2 * (i - 1)`` and its inverse has code ``2 * (i - 1) + 1``. Sorting codes
therefore orders letters by index first and puts the positive letter before
the negative one, and ``code ^ 1`` is the inverse letter.
"""

from __future__ import annotations

import re
from collections.abc import Iterable, Iterator
from dataclasses import dataclass
from enum import Enum

from walklab.exceptions import InvalidWordError

__all__ = [
    "Sign",
    "Generator",
    "GeneratorSystem",
    "Word",
    "NormalForm",
    "inverse_code",
    "code_index",
    "format_codes",
]

TOKEN_PATTERN = re.compile(
    r"^(?:(?P<prefix>[zxs])(?P<index>[0-9]+)|(?P<letter>[a-y]))"
    r"(?P<inverse>\^-1|')?$"
)
"""Regular expression for a single word token.

Examples:

- ``z3``, ``x1``, ``s2`` (indexed generators)
- ``z1^-1`` or ``z1'`` (inverse)
- ``a``, ``b^-1`` (letter shorthand, ``a`` is index 1)
"""


class Sign(str, Enum):
    """Sign of a generator letter."""

    positive = "positive"
    """The generator itself."""

    negative = "negative"
    """The inverse of the generator."""

    def __str__(self) -> str:
        return self.value


def inverse_code(code: int) -> int:
    """Code of the inverse letter."""
    return code ^ 1


def code_index(code: int) -> int:
    """One-based generator index of a letter code."""
    return (code >> 1) + 1


@dataclass(frozen=True, slots=True)
class Generator:
    """A generator ``z_i`` or its inverse."""

    index: int
    """One-based generator index."""

    sign: Sign = Sign.positive
    """Whether this is the generator or its inverse."""

    def __post_init__(self) -> None:
        if self.index < 1:
            raise InvalidWordError(
                f"Generator index must be at least 1 (got {self.index})."
            )

    @property
    def code(self) -> int:
        """Integer letter code."""
        return 2 * (self.index - 1) + (self.sign is Sign.negative)

    @classmethod
    def from_code(cls, code: int) -> Generator:
        """Create a generator from its letter code."""
        return cls(
            index=code_index(code),
            sign=Sign.negative if code & 1 else Sign.positive,
        )

    @classmethod
    def parse(cls, token: str) -> Generator:
        """Parse a token such as ``z3`` or ``z1^-1``.

        Raises
        ------
        walklab.exceptions.InvalidWordError
            Raised if the token is not a generator token.
        """
        m = TOKEN_PATTERN.match(token.strip())
        if not m:
            raise InvalidWordError(f"Not a generator token: {token!r}")
        if m["letter"]:
            index = ord(m["letter"]) - ord("a") + 1
        else:
            index = int(m["index"])
        sign = Sign.negative if m["inverse"] else Sign.positive
        return cls(index=index, sign=sign)

    def inverse(self) -> Generator:
        """The inverse generator (same index, flipped sign)."""
        return Generator(
            index=self.index,
            sign=(
                Sign.positive if self.sign is Sign.negative else Sign.negative
            ),
        )

    def __str__(self) -> str:
        if self.sign is Sign.negative:
            return f"z{self.index}^-1"
        return f"z{self.index}"


@dataclass(frozen=True, slots=True)
class GeneratorSystem:
    """The standard generating system of a presentation."""

    k: int
    """Number of base generators."""

    symmetric: bool = True
    """Whether the alphabet contains inverses (`False` for semigroups)."""

    def __post_init__(self) -> None:
        if self.k < 1:
            raise InvalidWordError(
                f"A generating system needs k >= 1 (got {self.k})."
            )

    @property
    def codes(self) -> tuple[int, ...]:
        """Letter codes of the alphabet, in canonical order."""
        if self.symmetric:
            return tuple(range(2 * self.k))
        return tuple(range(0, 2 * self.k, 2))

    @property
    def alphabet(self) -> tuple[Generator, ...]:
        """The alphabet as generators."""
        return tuple(Generator.from_code(c) for c in self.codes)

    def __contains__(self, code: object) -> bool:
        if not isinstance(code, int) or code < 0:
            return False
        if code_index(code) > self.k:
            return False
        return self.symmetric or code % 2 == 0

    def __len__(self) -> int:
        return len(self.codes)


@dataclass(frozen=True, slots=True)
class Word:
    """A finite sequence of generator letters (not necessarily reduced)."""

    codes: tuple[int, ...] = ()
    """Letter codes."""

    @classmethod
    def parse(cls, text: str) -> Word:
        """Parse space-separated tokens, such as ``"z3 z1^-1"``.

        The empty string and ``"e"`` are the empty word.
        """
        tokens = text.split()
        if tokens == ["e"]:
            return cls()
        return cls(tuple(Generator.parse(t).code for t in tokens))

    @classmethod
    def from_generators(cls, letters: Iterable[Generator]) -> Word:
        return cls(tuple(g.code for g in letters))

    @property
    def letters(self) -> tuple[Generator, ...]:
        """The letters as generators."""
        return tuple(Generator.from_code(c) for c in self.codes)

    def __len__(self) -> int:
        return len(self.codes)

    def __iter__(self) -> Iterator[int]:
        return iter(self.codes)

    def __add__(self, other: Word) -> Word:
        return Word(self.codes + other.codes)

    def __str__(self) -> str:
        return format_codes(self.codes)


@dataclass(frozen=True, slots=True)
class NormalForm:
    """Canonical geodesic word of an element of a presentation.

    Two normal forms are equal exactly when they represent the same element
    of the same presentation.
    """

    codes: tuple[int, ...]
    """Letter codes of the canonical word."""

    presentation: str
    """Tag of the presentation the element belongs to (e.g. ``free:2``)."""

    @property
    def letters(self) -> Word:
        """The canonical word."""
        return Word(self.codes)

    @property
    def length(self) -> int:
        """Word length of the element in the standard generators."""
        return len(self.codes)

    @property
    def is_identity(self) -> bool:
        return not self.codes

    def __str__(self) -> str:
        return format_codes(self.codes)


def format_codes(codes: Iterable[int]) -> str:
    """Render letter codes as space-separated tokens (``e`` if empty)."""
    text = " ".join(str(Generator.from_code(c)) for c in codes)
    return text or "e"
