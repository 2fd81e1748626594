import numpy as np
import pytest

from bihyper.jets import Constant, PowerLaw, Reciprocal

ACCEPTANCE_LINES: list[str] = []


def random_family(rng: np.random.Generator, with_constant: bool = True):
    kinds = ["power", "reciprocal"] + (["constant"] if with_constant else [])
    kind = kinds[rng.integers(len(kinds))]
    if kind == "power":
        return PowerLaw(rng.uniform(0.3, 3.0), rng.uniform(0.3, 3.0), rng.uniform(0.05, 0.95))
    if kind == "reciprocal":
        return Reciprocal(rng.uniform(0.3, 3.0), rng.uniform(0.3, 3.0))
    return Constant(rng.uniform(0.5, 2.0))


def random_height(rng: np.random.Generator, family) -> float:
    lo, hi = family.grid_bounds()
    return float(np.exp(rng.uniform(np.log(lo), np.log(hi))))


@pytest.fixture
def rng():
    return np.random.default_rng(20101231)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
