"""Tests for the walklab.ext.presentation datamodel module."""

from __future__ import annotations

import pytest

from walklab.exceptions import InvalidWordError
from walklab.ext.presentation import (
    Generator,
    GeneratorSystem,
    Sign,
    Word,
    format_codes,
)


@pytest.mark.parametrize(
    ("token", "index", "sign"),
    [
        ("z3", 3, Sign.positive),
        ("z1^-1", 1, Sign.negative),
        ("z2'", 2, Sign.negative),
        ("x4", 4, Sign.positive),
        ("a", 1, Sign.positive),
        ("b^-1", 2, Sign.negative),
    ],
)
def test_generator_parse(token: str, index: int, sign: Sign) -> None:
    g = Generator.parse(token)
    assert g.index == index
    assert g.sign is sign


@pytest.mark.parametrize("token", ["z0", "z", "zz1", "z1^-2", "1", "A"])
def test_generator_parse_invalid(token: str) -> None:
    with pytest.raises(InvalidWordError):
        Generator.parse(token)


def test_codes() -> None:
    assert Generator.parse("z1").code == 0
    assert Generator.parse("z1^-1").code == 1
    assert Generator.parse("z3^-1").code == 5
    assert Generator.from_code(4) == Generator(index=3)
    assert Generator.parse("z2").inverse() == Generator.parse("z2^-1")


def test_generator_system() -> None:
    group = GeneratorSystem(k=2)
    semigroup = GeneratorSystem(k=3, symmetric=False)

    assert group.codes == (0, 1, 2, 3)
    assert len(group) == 4
    assert semigroup.codes == (0, 2, 4)
    assert 1 not in semigroup
    assert 6 not in semigroup
    assert [str(g) for g in semigroup.alphabet] == ["z1", "z2", "z3"]


def test_word_parse() -> None:
    assert Word.parse("z3 z1^-1").codes == (4, 1)
    assert Word.parse("e") == Word()
    assert Word.parse("") == Word()
    assert str(Word.parse("a b")) == "z1 z2"
    assert Word.parse("a") + Word.parse("b") == Word.parse("a b")


def test_format_codes() -> None:
    assert format_codes(()) == "e"
    assert format_codes((0, 3)) == "z1 z2^-1"
