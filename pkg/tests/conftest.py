import numpy as np
import pytest

from bandforge.coefficients import CoefficientModel

BUILTINS = ["eq14", "eq17", "eq19", "eq21"]


def free_chain():
    """a_n = 0, b_n = 1/2 for all n: the semicircle on [-1, 1]."""
    return CoefficientModel.custom([], [0.0], [0.5])


def semicircle(E):
    E = np.asarray(E, dtype=float)
    return np.where(np.abs(E) < 1, 2 / np.pi * np.sqrt(np.clip(1 - E**2, 0, None)), 0.0)


@pytest.fixture
def free():
    return free_chain()


@pytest.fixture(params=BUILTINS)
def builtin(request):
    return CoefficientModel.builtin(request.param)


_ACCEPTANCE = []


def record_acceptance(number, title, passed, detail=""):
    _ACCEPTANCE.append((number, title, passed, detail))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, passed, detail in sorted(_ACCEPTANCE):
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"[{status}] {number:>2}. {title}" + (f" -- {detail}" if detail else ""))
