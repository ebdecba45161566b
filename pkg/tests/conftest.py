import numpy as np
import pytest

from curvefit import Dataset


def exp_data(sigma, seed, n=200):
    """Samples of 5*exp(0.7x) on [-5, 5] with Gaussian noise of scale sigma."""
    x = np.linspace(-5.0, 5.0, n)
    rng = np.random.default_rng(seed)
    y = 5.0 * np.exp(0.7 * x)
    if sigma > 0:
        y = y + rng.normal(0.0, sigma, n)
    return Dataset(x, y)


@pytest.fixture
def exp_clean():
    return exp_data(0.0, 0)


@pytest.fixture
def line_data():
    x = np.linspace(1.0, 10.0, 50)
    return Dataset(x, 3 * x + 4)


def write_text(path, text):
    path.write_text(text, encoding="utf-8")
    return path


def write_xy(path, x, y, header="x,y"):
    """CSV with a header and repr-formatted rows; None becomes an empty field."""
    fmt = lambda v: "" if v is None else repr(float(v))
    rows = [header] + [f"{fmt(a)},{fmt(b)}" for a, b in zip(x, y)]
    return write_text(path, "\n".join(rows) + "\n")


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    if mod is not None and mod.LINES:
        terminalreporter.section("acceptance criteria")
        for line in mod.LINES:
            terminalreporter.write_line(line)
