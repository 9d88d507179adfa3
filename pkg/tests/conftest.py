from pathlib import Path

import pytest

from dirtybench.data import CATEGORICAL, Column, dataset_from_rows, load_dataset

DATA_DIR = Path(__file__).parent.parent / "data"


@pytest.fixture(scope="session")
def iris_path():
    return DATA_DIR / "iris.csv"


@pytest.fixture()
def iris(iris_path):
    return load_dataset(iris_path, target="species")


@pytest.fixture()
def student_table():
    """The four-row student example: one FD violation pair, one conflict pair."""
    cols = [
        Column("StudentNo", CATEGORICAL),
        Column("Name", CATEGORICAL),
        Column("City", CATEGORICAL),
        Column("Country", CATEGORICAL),
    ]
    rows = [
        ["170302", "Alice", "NYC", None],
        ["170302", "Steven", None, "FR"],
        ["170304", "Bob", "NYC", "U.S.A"],
        ["170304", "Bob", "LA", "U.S.A"],
    ]
    return dataset_from_rows(cols, rows, source="<students>")
