"""Free groups in their natural generators."""

from __future__ import annotations

from walklab.ext.presentation import PartiallyCommutativePresentation

__all__ = ["FreePresentation"]


class FreePresentation(PartiallyCommutativePresentation):
    """The free group F_k on ``z1 .. zk``.

    Normal forms are freely reduced words, computed with a stack.
    """

    name = "free"

    def commutes(self, i: int, j: int) -> bool:
        return False

    def append(self, letters: list[int], code: int) -> None:
        if letters and letters[-1] == code ^ 1:
            letters.pop()
        else:
            letters.append(code)
