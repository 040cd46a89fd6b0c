"""Shared fixtures: the six-sequence reference example and its tables."""

import io

import pytest

from huspmine import (
    bind_thresholds,
    bind_unit_utilities,
    parse_dataset,
    parse_item_values,
)

DATASET_TEXT = """\
d[2] -1 a[2] e[3] -1 b[3] d[3] -1 c[4] e[5] -2
b[1] d[3] -1 b[5] c[3] e[2] -1 a[1] c[2] d[3] e[4] -2
a[3] b[2] -1 a[2] b[3] c[1] -1 b[4] c[5] e[4] -1 d[3] -2
a[3] c[2] -1 b[5] d[1] -1 c[4] d[5] e[3] -2
a[3] b[4] -1 a[2] b[2] c[5] d[3] e[4] -2
f[4] -1 b[5] c[3] -1 b[3] e[4] -2
"""

UTILITY_TEXT = """\
a 4
b 5
c 3
d 1
e 2
f 6
"""

MTABLE_TEXT = """\
a 500
b 500
c 500
d 500
e 200
f 70
"""


@pytest.fixture(scope="session")
def example_db():
    return parse_dataset(io.StringIO(DATASET_TEXT))


@pytest.fixture(scope="session")
def example_utable(example_db):
    return bind_unit_utilities(
        parse_item_values(io.StringIO(UTILITY_TEXT)), example_db.symbols
    )


@pytest.fixture(scope="session")
def example_mtable(example_db):
    return bind_thresholds(
        parse_item_values(io.StringIO(MTABLE_TEXT)), example_db.symbols
    )


@pytest.fixture(scope="session")
def ids(example_db):
    """Convenience name -> id mapping for the example items."""
    return {name: example_db.symbols.id_of(name) for name in "abcdef"}
