import numpy as np
import pytest

from activescalar.spectral import PeriodicGrid
from activescalar.verifier import default_modulus_setup


@pytest.fixture(scope="session")
def modulus_setup():
    """Kernel table and minorant at the default cutoff (built once per session)."""
    return default_modulus_setup()


@pytest.fixture
def grid64():
    return PeriodicGrid(64)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_field(grid, rng, modes=8, mean=0.0):
    k = np.arange(1, modes + 1)
    a = rng.normal(size=modes) / k
    b = rng.normal(size=modes) / k
    x = grid.points
    return grid.function(mean + np.cos(np.outer(x, k)) @ a + np.sin(np.outer(x, k)) @ b)


# ------------------------------------------------------------ acceptance summary

_CRITERIA: dict = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or rep.when != "call":
        return
    number, title = mark.args
    detail = "; ".join(f"{k}={v}" for k, v in item.user_properties)
    if number in _CRITERIA:
        _, ok, earlier = _CRITERIA[number]
        _CRITERIA[number] = (title, ok and rep.passed, "; ".join(d for d in (earlier, detail) if d))
    else:
        _CRITERIA[number] = (title, rep.passed, detail)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        title, ok, detail = _CRITERIA[number]
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {title}"
        terminalreporter.write_line(line + (f"  [{detail}]" if detail else ""))
