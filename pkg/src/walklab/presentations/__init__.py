"""Built-in presentation plugins."""

__all__ = [
    "FreeAbelianPresentation",
    "FreePresentation",
    "LocallyFreeGroupPresentation",
    "LocallyFreeSemigroupPresentation",
]

from walklab.presentations.abelian import FreeAbelianPresentation
from walklab.presentations.free import FreePresentation
from walklab.presentations.locallyfree import (
    LocallyFreeGroupPresentation,
    LocallyFreeSemigroupPresentation,
)
