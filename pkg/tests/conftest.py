import numpy as np
import pytest

from ellipmpc import _backend, kinematics, ocp, overlap, solver

BACKENDS = _backend.available()
_USERS = (kinematics, ocp, overlap, solver)


@pytest.fixture(params=BACKENDS)
def backend(request, monkeypatch):
    """Run the test once per available kernel implementation."""
    mod = _backend.load(request.param)
    for user in _USERS:
        monkeypatch.setattr(user, "kernels", mod)
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


_CRITERIA = {}


@pytest.fixture
def criterion(capsys):
    """Record and print the outcome of one acceptance criterion."""
    def record(number, ok, detail):
        line = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
        _CRITERIA[number] = line
        with capsys.disabled():
            print("\n" + line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        terminalreporter.write_line(_CRITERIA[number])
