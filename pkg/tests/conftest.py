import sys

import pytest

from revreact.integrator import run
from revreact.system import default_config


@pytest.fixture(scope="session")
def default_traj():
    """The reference 2D run, shared by every test that only reads it."""
    return run(default_config())


def pytest_terminal_summary(terminalreporter):
    mod = next((m for name, m in sys.modules.items() if name.endswith("test_acceptance")), None)
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(results):
        terminalreporter.write_line(results[n])
