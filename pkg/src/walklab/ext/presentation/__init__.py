"""Support the walklab presentation extensions."""

__all__ = [
    "DEFAULT_K_CAP",
    "SPEC_PATTERN",
    "ElementKey",
    "Generator",
    "GeneratorSystem",
    "NormalForm",
    "PartiallyCommutativePresentation",
    "Presentation",
    "PresentationPlugins",
    "Sign",
    "Word",
    "format_codes",
]

from walklab.ext.presentation._base import (
    DEFAULT_K_CAP,
    ElementKey,
    PartiallyCommutativePresentation,
    Presentation,
)
from walklab.ext.presentation._datamodel import (
    Generator,
    GeneratorSystem,
    NormalForm,
    Sign,
    Word,
    format_codes,
)
from walklab.ext.presentation._discovery import (
    SPEC_PATTERN,
    PresentationPlugins,
)
