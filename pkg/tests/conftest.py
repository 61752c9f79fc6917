import numpy as np
import pytest

from procal.dataset import Dataset, make_blobs


@pytest.fixture(scope="session")
def blobs():
    """5-class, 10-attribute Gaussian blobs shared by the trend tests."""
    return make_blobs(5000, 10, classes=5, seed=1, spread=1.0, center_box=4.0)


def labelled(x, labels):
    n = x.shape[1]
    return Dataset(x, [f"x{i}" for i in range(n)] + ["class"], np.asarray(labels), class_column=n)


@pytest.fixture
def two_pairs():
    x = np.array([[1.0, 2.0], [1.1, 2.0], [10.0, 13.0], [10.1, 13.0]])
    return labelled(x, ["p", "p", "q", "q"])


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    if mod is not None and mod.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in mod.RESULTS:
            terminalreporter.write_line(line)
