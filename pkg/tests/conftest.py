"""Shared fixtures: repository paths used across the test modules."""

from __future__ import annotations

import pathlib

import pytest

REPO_ROOT = pathlib.Path(__file__).resolve().parent.parent


@pytest.fixture(scope="session")
def data_dir() -> pathlib.Path:
    return REPO_ROOT / "data"


@pytest.fixture(scope="session")
def golden_dir() -> pathlib.Path:
    return REPO_ROOT / "tests" / "golden"
