from __future__ import annotations

import logging
from abc import ABCMeta, abstractmethod
from collections.abc import Iterable, Sequence
from typing import ClassVar

from walklab.exceptions import (
    InvalidInputError,
    InvalidWordError,
    UnsupportedOperationError,
    UsageError,
)
from walklab.ext.presentation._datamodel import (
    Generator,
    GeneratorSystem,
    NormalForm,
    Word,
    code_index,
    format_codes,
)

__all__ = [
    "DEFAULT_K_CAP",
    "ElementKey",
    "Presentation",
    "PartiallyCommutativePresentation",
]

DEFAULT_K_CAP = 64
"""Default upper bound on the number of base generators."""

ElementKey = tuple[int, ...]
"""Canonical letter codes of an element, used as a dictionary key."""


class Presentation(metaclass=ABCMeta):
    """Base class for presentation plugins.

    A presentation owns a generating system and knows how to right-multiply
    a canonical word by a single letter. Everything else (normalization,
    multiplication, inversion, enumeration and random walks) is built on that
    one primitive.

    Parameters
    ----------
    k
        Number of base generators.
    k_cap
        Upper bound on ``k``.
    """

    name: ClassVar[str]
    """Plugin name, the ``kind`` part of a ``kind:k`` spec string."""

    symmetric: ClassVar[bool] = True
    """Whether the presentation is a group (alphabet closed under inverses).
    """

    def __init__(self, k: int, *, k_cap: int = DEFAULT_K_CAP) -> None:
        if not 1 <= k <= k_cap:
            raise InvalidInputError(
                f"{self.name} needs 1 <= k <= {k_cap} (got k={k})."
            )
        self._k = k
        self._system = GeneratorSystem(k=k, symmetric=self.symmetric)
        self._logger = logging.getLogger(__name__)

    @property
    def k(self) -> int:
        """Number of base generators."""
        return self._k

    @property
    def system(self) -> GeneratorSystem:
        """The standard generating system."""
        return self._system

    @property
    def tag(self) -> str:
        """Spec string of this presentation, such as ``free:2``."""
        return f"{self.name}:{self.k}"

    @property
    def codes(self) -> tuple[int, ...]:
        """Letter codes of the generating alphabet."""
        return self._system.codes

    @property
    def logger(self) -> logging.Logger:
        return self._logger

    @property
    def identity(self) -> NormalForm:
        """The identity element (the empty normal form)."""
        return NormalForm((), self.tag)

    @abstractmethod
    def append(self, letters: list[int], code: int) -> None:
        """Right-multiply a canonical word by one letter, in place.

        Parameters
        ----------
        letters
            Letter codes of a normal form. On return it holds the normal form
            of the product.
        code
            Letter code of an alphabet letter.
        """
        raise NotImplementedError

    def step(self, key: ElementKey, code: int) -> ElementKey:
        """Right-multiply an element key by one letter."""
        letters = list(key)
        self.append(letters, code)
        return tuple(letters)

    def reduce(self, codes: Iterable[int]) -> ElementKey:
        """Canonical key of the product of a sequence of letters."""
        letters: list[int] = []
        for code in codes:
            self.append(letters, code)
        return tuple(letters)

    def word_length(self, key: Sequence[int]) -> int:
        """Word length of an element in this presentation's metric.

        ``key`` holds the canonical letter codes of the element (a key tuple
        or a working list built with `append`).
        """
        return len(key)

    def inverse_letter(self, code: int) -> int:
        """Code of the inverse alphabet letter."""
        if not self.symmetric:
            raise UnsupportedOperationError(
                f"{self.tag} is a semigroup; letters have no inverses."
            )
        return code ^ 1

    def format_letter(self, code: int) -> str:
        """Token for an alphabet letter."""
        return str(Generator.from_code(code))

    def parse_letter(self, token: str) -> int:
        """Letter code for a token, checked against the alphabet."""
        code = Generator.parse(token).code
        self._check_codes((code,))
        return code

    def format_key(self, key: ElementKey) -> str:
        """Render an element key as a word."""
        return format_codes(key)

    def element(self, key: ElementKey) -> NormalForm:
        """Wrap a canonical key as a `NormalForm` of this presentation."""
        return NormalForm(key, self.tag)

    def normalize(self, word: Word | Sequence[int]) -> NormalForm:
        """Canonical geodesic normal form of the element a word defines.

        Raises
        ------
        walklab.exceptions.InvalidWordError
            Raised if the word uses letters outside the alphabet (including
            inverse letters in a semigroup).
        """
        codes = word.codes if isinstance(word, Word) else tuple(word)
        self._check_codes(codes)
        return self.element(self.reduce(codes))

    def parse(self, text: str) -> NormalForm:
        """Normalize a word given as space-separated tokens."""
        return self.normalize(Word.parse(text))

    def multiply(self, a: NormalForm, b: NormalForm) -> NormalForm:
        """Product of two normal forms.

        Raises
        ------
        walklab.exceptions.UsageError
            Raised if the operands belong to other presentations.
        """
        self._check_member(a)
        self._check_member(b)
        letters = list(a.codes)
        for code in b.codes:
            self.append(letters, code)
        return self.element(tuple(letters))

    def invert(self, a: NormalForm) -> NormalForm:
        """Inverse of a normal form.

        Raises
        ------
        walklab.exceptions.UnsupportedOperationError
            Raised for semigroup presentations.
        """
        if not self.symmetric:
            raise UnsupportedOperationError(
                f"{self.tag} is a semigroup and has no inverses."
            )
        self._check_member(a)
        return self.element(
            self.reduce(self.inverse_letter(c) for c in reversed(a.codes))
        )

    def length(self, a: NormalForm) -> int:
        """Word length (geodesic distance from the identity)."""
        self._check_member(a)
        return self.word_length(a.codes)

    def _check_member(self, a: NormalForm) -> None:
        if a.presentation != self.tag:
            raise UsageError(
                f"Element of {a.presentation} used with {self.tag}."
            )

    def _check_codes(self, codes: Iterable[int]) -> None:
        for code in codes:
            if code in self._system:
                continue
            if code_index(code) <= self.k and not self.symmetric:
                raise InvalidWordError(
                    f"{Generator.from_code(code)} is an inverse letter, but "
                    f"{self.tag} is a semigroup."
                )
            raise InvalidWordError(
                f"{Generator.from_code(code)} is not a letter of {self.tag}."
            )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Presentation):
            return NotImplemented
        return self.tag == other.tag

    def __hash__(self) -> int:
        return hash(self.tag)

    def __repr__(self) -> str:
        return f"{type(self).__name__}(k={self.k})"


class PartiallyCommutativePresentation(Presentation):
    """Graph product of infinite cyclic groups (or free commutative monoids
    for semigroups) over a commutation graph.

    Normal forms are reduced by shuffle-cancellation: a new letter cancels
    against its inverse when every letter after that inverse commutes with
    it. Otherwise the letter is placed at the lexicographically least
    position it can reach by commuting swaps. The result is the least word
    of the element's commutation class in the order ``z1 < z1^-1 < z2 < ...``.

    Subclasses implement `commutes`.
    """

    def __init__(self, k: int, *, k_cap: int = DEFAULT_K_CAP) -> None:
        super().__init__(k, k_cap=k_cap)
        size = 2 * k
        # independent[c][d]: letters c and d commute and have distinct index
        self._independent: list[list[bool]] = [
            [
                code_index(c) != code_index(d)
                and self.commutes(code_index(c), code_index(d))
                for d in range(size)
            ]
            for c in range(size)
        ]

    @abstractmethod
    def commutes(self, i: int, j: int) -> bool:
        """Whether distinct generators ``z_i`` and ``z_j`` commute."""
        raise NotImplementedError

    def independent(self, c: int, d: int) -> bool:
        """Whether letters ``c`` and ``d`` can be swapped when adjacent."""
        return self._independent[c][d]

    def append(self, letters: list[int], code: int) -> None:
        independent = self._independent[code]
        inverse = code ^ 1
        j = len(letters) - 1
        while j >= 0:
            other = letters[j]
            if other == inverse:
                del letters[j]
                return
            if not independent[other]:
                break
            j -= 1
        position = j + 1
        end = len(letters)
        while position < end and letters[position] < code:
            position += 1
        letters.insert(position, code)
