"""Test the walklab.ext.presentation discovery module."""

from __future__ import annotations

import pytest

from walklab.exceptions import InvalidInputError
from walklab.ext.presentation import SPEC_PATTERN, PresentationPlugins
from walklab.presentations import (
    FreePresentation,
    LocallyFreeGroupPresentation,
)


def test_discovery() -> None:
    plugins = PresentationPlugins.load_plugins()

    assert plugins.names == ["abelian", "free", "lfgroup", "lfsemigroup"]
    assert plugins["free"] == FreePresentation


def test_create() -> None:
    plugins = PresentationPlugins.load_plugins()

    presentation = plugins.create("lfgroup:4")
    assert isinstance(presentation, LocallyFreeGroupPresentation)
    assert presentation.k == 4
    assert presentation.tag == "lfgroup:4"


def test_create_with_k_cap() -> None:
    plugins = PresentationPlugins.load_plugins()

    with pytest.raises(InvalidInputError):
        plugins.create("free:10", k_cap=8)


@pytest.mark.parametrize("spec", ["free", "free:", "Free:2", "free:-1", ":2"])
def test_malformed_spec(spec: str) -> None:
    with pytest.raises(InvalidInputError):
        PresentationPlugins.load_plugins().create(spec)


def test_unknown_kind() -> None:
    with pytest.raises(InvalidInputError, match="not a known presentation"):
        PresentationPlugins.load_plugins().create("heisenberg:3")


@pytest.mark.parametrize(
    ("spec", "kind", "k"),
    [("free:2", "free", "2"), ("lfsemigroup:20", "lfsemigroup", "20")],
)
def test_spec_pattern(spec: str, kind: str, k: str) -> None:
    match = SPEC_PATTERN.match(spec)
    assert match is not None
    assert match["kind"] == kind
    assert match["k"] == k
    assert SPEC_PATTERN.match(spec.upper()) is None
