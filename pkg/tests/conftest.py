from __future__ import annotations

from pathlib import Path

import pytest

from cousr import load_database

DATA_DIR = Path(__file__).resolve().parent.parent / "data"
EXAMPLE_DB = DATA_DIR / "example.db"
EXAMPLE_UT = DATA_DIR / "example.ut"

# the worked example uses items 1..7, aliased a..g in the docs
A, B, C, D, E, F, G = range(1, 8)


@pytest.fixture(scope="session")
def example_db():
    return load_database(EXAMPLE_DB, EXAMPLE_UT)
