import sys
from fractions import Fraction
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from growthlab.cayley import GeneratorSet, enumerate_ball, symmetrize  # noqa: E402
from growthlab.exact_linalg import ExactMatrix  # noqa: E402


@pytest.fixture(scope="session")
def S():
    return ExactMatrix.from_rows([[0, -1], [1, 0]])


@pytest.fixture(scope="session")
def T():
    return ExactMatrix.from_rows([[1, 1], [0, 1]])


@pytest.fixture(scope="session")
def D():
    return ExactMatrix.from_rows([[2, 0], [0, Fraction(1, 2)]])


@pytest.fixture(scope="session")
def st_gens(S, T):
    return symmetrize(GeneratorSet.of(S, T, labels=["S", "T"]))


@pytest.fixture(scope="session")
def t_gens(T):
    return symmetrize(GeneratorSet.of(T, labels=["T"]))


@pytest.fixture(scope="session")
def solv_gens(D, T):
    return symmetrize(GeneratorSet.of(D, T, labels=["D", "T"]))


@pytest.fixture(scope="session")
def st_ball12(st_gens):
    return enumerate_ball(st_gens, 12)


@pytest.fixture(scope="session")
def solv_ball14(solv_gens):
    return enumerate_ball(solv_gens, 14)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.RESULTS:
        terminalreporter.write_line(line)
