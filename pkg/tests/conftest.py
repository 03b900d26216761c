import pathlib

import pytest

from collana.driver import load_program
from collana.kernel import Compound

DATA = pathlib.Path(__file__).parent / "data"
GOLDEN = pathlib.Path(__file__).parent / "golden"


def read_data(name: str) -> str:
    return (DATA / name).read_text(encoding="utf-8")


def int_list(*xs) -> Compound:
    out = Compound("nil")
    for x in reversed(xs):
        out = Compound("cons", (Compound(str(x)), out))
    return out


@pytest.fixture(scope="session")
def sorting_program():
    return load_program(read_data("sorting.hc"), read_data("sorting_mset.ca"))


@pytest.fixture(scope="session")
def dedup_program():
    return load_program(read_data("dedup_split.hc"),
                        read_data("dedup_split_set.ca"))


@pytest.fixture(scope="session")
def traverse_program():
    return load_program(read_data("traverse.hc"), read_data("traverse_dlist.ca"))
