import sys
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, str(Path(__file__).parent))

from reality_ledger.fixtures import fig3, fig4  # noqa: E402
from reality_ledger.scenario import replay_ledger  # noqa: E402

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
# deeper sweep on demand: pytest --hypothesis-profile=long
settings.register_profile("long", deadline=None, max_examples=500,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def fig4_scenario():
    return fig4()


@pytest.fixture
def fig4_ledger(fig4_scenario):
    return replay_ledger(fig4_scenario)


@pytest.fixture
def n(fig4_scenario):
    """Colour name -> transaction id for the six-conflict example."""
    return fig4_scenario.names


@pytest.fixture
def fig3_scenario():
    return fig3()


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
