"""Locally free groups and semigroups.

Neighbouring generators ``z_i, z_{i+1}`` generate a free subgroup (or
subsemigroup), generators whose indices differ by two or more commute.
"""

from __future__ import annotations

from walklab.ext.presentation import PartiallyCommutativePresentation

__all__ = [
    "LocallyFreeGroupPresentation",
    "LocallyFreeSemigroupPresentation",
]


class LocallyFreeGroupPresentation(PartiallyCommutativePresentation):
    """The locally free group LF_k."""

    name = "lfgroup"

    def commutes(self, i: int, j: int) -> bool:
        return abs(i - j) >= 2


class LocallyFreeSemigroupPresentation(PartiallyCommutativePresentation):
    """The locally free semigroup LF+_k.

    Only positive letters are allowed and nothing ever cancels, so the
    length of a product of n generators is exactly n.
    """

    name = "lfsemigroup"
    symmetric = False

    def commutes(self, i: int, j: int) -> bool:
        return abs(i - j) >= 2
