"""Pytest configuration and fixtures."""

from __future__ import annotations

import os
from collections.abc import Generator
from pathlib import Path

import pytest
from typer.testing import CliRunner

from walklab.cache import CACHE_DIR_ENV
from walklab.presentations import (
    FreeAbelianPresentation,
    FreePresentation,
    LocallyFreeGroupPresentation,
    LocallyFreeSemigroupPresentation,
)


@pytest.fixture
def temp_cwd(tmp_path: Path) -> Generator[Path, None, None]:
    """Run the test from a temporary directory."""
    current_dir = Path.cwd()

    os.chdir(tmp_path)
    yield tmp_path

    os.chdir(current_dir)


@pytest.fixture(autouse=True)
def cache_dir(
    tmp_path_factory: pytest.TempPathFactory, monkeypatch: pytest.MonkeyPatch
) -> Path:
    """Point the result cache at a fresh directory for every test."""
    path = tmp_path_factory.mktemp("cache")
    monkeypatch.setenv(CACHE_DIR_ENV, str(path))
    return path


@pytest.fixture(scope="session")
def runner() -> CliRunner:
    return CliRunner()


@pytest.fixture
def free2() -> FreePresentation:
    return FreePresentation(2)


@pytest.fixture
def abelian2() -> FreeAbelianPresentation:
    return FreeAbelianPresentation(2)


@pytest.fixture
def lfgroup3() -> LocallyFreeGroupPresentation:
    return LocallyFreeGroupPresentation(3)


@pytest.fixture
def lfsemigroup3() -> LocallyFreeSemigroupPresentation:
    return LocallyFreeSemigroupPresentation(3)
