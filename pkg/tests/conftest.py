import sys
from pathlib import Path

import numpy as np
import pytest

from rvfldl.data import load_csv_matrix, load_idx

DATA = Path(__file__).parent / "data"
sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "scripts"))


def data_path(name: str) -> Path:
    return DATA / name


@pytest.fixture(scope="session")
def blobs():
    """Two-blob train/test split shipped as CSV (see scripts/build_fixtures.py)."""
    return (load_csv_matrix(DATA / "blobs-train.csv", has_label_column=True),
            load_csv_matrix(DATA / "blobs-test.csv", has_label_column=True))


@pytest.fixture(scope="session")
def mnist():
    train = load_idx(DATA / "mnist-train-images-idx3-ubyte.gz", DATA / "mnist-train-labels-idx1-ubyte.gz")
    test = load_idx(DATA / "mnist-test-images-idx3-ubyte.gz", DATA / "mnist-test-labels-idx1-ubyte.gz")
    return train, test


@pytest.fixture(scope="session")
def fashion():
    return load_idx(DATA / "fashion-images-idx3-ubyte.gz", DATA / "fashion-labels-idx1-ubyte.gz")


@pytest.fixture
def rng():
    # numpy's generator only builds test inputs; the package uses its own streams
    return np.random.default_rng(20240611)


#: criterion number -> (PASS/FAIL, detail); filled by tests/test_acceptance.py
ACCEPTANCE: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        status, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:2d}: {status}  {detail}")
