"""Tests for the walklab.measures module."""

from __future__ import annotations

import math
from pathlib import Path

import pytest

from walklab.exceptions import InvalidInputError, InvalidWordError
from walklab.measures import Distribution, SymmetricMeasure, pair_codes
from walklab.presentations import (
    FreePresentation,
    LocallyFreeGroupPresentation,
    LocallyFreeSemigroupPresentation,
)


def test_uniform(free2: FreePresentation) -> None:
    mu = SymmetricMeasure.uniform(free2)
    assert mu.codes == (0, 1, 2, 3)
    assert all(w == 0.25 for w in mu.weights.values())
    assert mu.entropy() == pytest.approx(2.0)
    assert mu.presentation == "free:2"


def test_uniform_semigroup(
    lfsemigroup3: LocallyFreeSemigroupPresentation,
) -> None:
    mu = SymmetricMeasure.uniform(lfsemigroup3)
    assert mu.codes == (0, 2, 4)
    assert not mu.symmetric
    assert mu.entropy() == pytest.approx(math.log2(3))


def test_asymmetric_weights_rejected(free2: FreePresentation) -> None:
    with pytest.raises(InvalidInputError, match="not symmetric"):
        SymmetricMeasure.create(free2, {0: 0.3, 1: 0.2, 2: 0.25, 3: 0.25})


def test_weights_must_sum_to_one(free2: FreePresentation) -> None:
    with pytest.raises(InvalidInputError):
        SymmetricMeasure.create(free2, {0: 0.25, 1: 0.25})


def test_letter_outside_alphabet(free2: FreePresentation) -> None:
    with pytest.raises(InvalidInputError):
        SymmetricMeasure.create(free2, {4: 0.5, 5: 0.5})


def test_zero_weights_dropped(free2: FreePresentation) -> None:
    mu = SymmetricMeasure.create(free2, {0: 0.5, 1: 0.5, 2: 0.0, 3: 0.0})
    assert mu.codes == (0, 1)


def test_from_pair_weights(lfgroup3: LocallyFreeGroupPresentation) -> None:
    mu = SymmetricMeasure.from_pair_weights(lfgroup3, [2.0, 1.0, 1.0])
    assert mu.weights[0] == pytest.approx(0.25)
    assert mu.weights[1] == pytest.approx(0.25)
    assert mu.weights[4] == pytest.approx(0.125)
    assert mu.pair_weights(lfgroup3) == pytest.approx([0.5, 0.25, 0.25])


def test_from_pair_weights_wrong_length(free2: FreePresentation) -> None:
    with pytest.raises(InvalidInputError):
        SymmetricMeasure.from_pair_weights(free2, [1.0, 1.0, 1.0])


def test_pair_codes(
    free2: FreePresentation, lfsemigroup3: LocallyFreeSemigroupPresentation
) -> None:
    assert pair_codes(free2) == (0, 2)
    assert pair_codes(lfsemigroup3) == (0, 2, 4)


def test_from_file(tmp_path: Path, free2: FreePresentation) -> None:
    path = tmp_path / "mu.txt"
    path.write_text("# weights per inverse pair\nz1 0.6\n\nz2^-1 0.4  # b\n")
    mu = SymmetricMeasure.from_file(free2, path)
    assert mu.weights[0] == pytest.approx(0.3)
    assert mu.weights[1] == pytest.approx(0.3)
    assert mu.weights[2] == pytest.approx(0.2)
    assert mu.weights[3] == pytest.approx(0.2)
    assert mu.describe(free2)["z2^-1"] == pytest.approx(0.2)


def test_from_file_renormalizes(
    tmp_path: Path, free2: FreePresentation
) -> None:
    path = tmp_path / "mu.txt"
    path.write_text("z1 0.5\nz2 0.5000000001\n")
    mu = SymmetricMeasure.from_file(free2, path)
    assert math.fsum(mu.weights.values()) == pytest.approx(1.0, abs=1e-15)


def test_from_file_rejects_bad_total(
    tmp_path: Path, free2: FreePresentation
) -> None:
    path = tmp_path / "mu.txt"
    path.write_text("z1 0.5\nz2 0.4\n")
    with pytest.raises(InvalidInputError, match="sum to"):
        SymmetricMeasure.from_file(free2, path)


def test_from_file_rejects_inverse_in_semigroup(
    tmp_path: Path, lfsemigroup3: LocallyFreeSemigroupPresentation
) -> None:
    path = tmp_path / "mu.txt"
    path.write_text("z1 0.5\nz2^-1 0.5\n")
    with pytest.raises(InvalidWordError):
        SymmetricMeasure.from_file(lfsemigroup3, path)


@pytest.mark.parametrize(
    "text", ["z1\n", "z1 heavy\n", "z1 -0.5\nz2 1.5\n", "z1 0.5 0.5\n"]
)
def test_from_file_malformed(
    tmp_path: Path, free2: FreePresentation, text: str
) -> None:
    path = tmp_path / "mu.txt"
    path.write_text(text)
    with pytest.raises(InvalidInputError):
        SymmetricMeasure.from_file(free2, path)


def test_from_file_missing(tmp_path: Path, free2: FreePresentation) -> None:
    with pytest.raises(InvalidInputError, match="Cannot read"):
        SymmetricMeasure.from_file(free2, tmp_path / "missing.txt")


def test_total_variation(free2: FreePresentation) -> None:
    uniform = SymmetricMeasure.uniform(free2)
    skewed = SymmetricMeasure.from_pair_weights(free2, [0.7, 0.3])
    assert uniform.total_variation(uniform) == 0.0
    assert uniform.total_variation(skewed) == pytest.approx(0.2)


def test_distribution() -> None:
    d = Distribution(
        table={(): 0.5, (0,): 0.25, (0, 0): 0.25},
        steps=2,
        presentation="abelian:1",
    )
    assert d.support_size == 3
    assert d.total_mass == 1.0
    assert d[(1,)] == 0.0
    assert d.mass_where(lambda key: len(key) > 0) == 0.5
    assert d.expected_length(len) == pytest.approx(0.75)
