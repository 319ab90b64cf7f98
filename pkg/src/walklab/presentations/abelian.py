"""Free abelian groups in their natural generators."""

from __future__ import annotations

from bisect import bisect_left, insort

from walklab.ext.presentation import (
    NormalForm,
    PartiallyCommutativePresentation,
)

__all__ = ["FreeAbelianPresentation"]


class FreeAbelianPresentation(PartiallyCommutativePresentation):
    """The free abelian group Z^k on ``z1 .. zk``.

    A normal form is the exponent vector written as a sorted word, so its
    length is the sum of the absolute exponents.
    """

    name = "abelian"

    def commutes(self, i: int, j: int) -> bool:
        return True

    def append(self, letters: list[int], code: int) -> None:
        # Sorted words hold each index with a single sign, so the run of an
        # index starts at the first code >= its positive letter.
        start = bisect_left(letters, code & ~1)
        if start < len(letters) and letters[start] == code ^ 1:
            del letters[start]
        else:
            insort(letters, code)

    def exponents(self, a: NormalForm) -> tuple[int, ...]:
        """Exponent vector of an element."""
        self._check_member(a)
        vector = [0] * self.k
        for code in a.codes:
            vector[code >> 1] += -1 if code & 1 else 1
        return tuple(vector)
