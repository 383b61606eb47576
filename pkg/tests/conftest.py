import pytest

from heegner.engine import CurveInput
from heegner.quadarith import QuadOrder


@pytest.fixture(autouse=True)
def isolated_home(tmp_path, monkeypatch):
    """Keep ~/.heegner.json and HEEGNER_* settings of the host out of the tests."""
    home = tmp_path / "home"
    home.mkdir()
    monkeypatch.setenv("HOME", str(home))
    for name in ("HEEGNER_ORACLE_BUDGET", "HEEGNER_COUNT_BUDGET", "HEEGNER_PRECISION_SLACK",
                 "HEEGNER_MAX_WORKERS", "HEEGNER_VERBOSE"):
        monkeypatch.delenv(name, raising=False)
    return home


@pytest.fixture
def gaussian():
    return QuadOrder(-4)


@pytest.fixture
def curve_99():
    """Conductor 3^2 * 11 with the default supercuspidal at 3 and Steinberg at 11."""
    return CurveInput(N={3: 2, 11: 1})
