import copy
import sys
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, str(Path(__file__).parent))

from dpsyn.bench import fig1_doc, gen_fig1  # noqa: E402
from dpsyn.model import system_from_dict  # noqa: E402

settings.register_profile(
    "repo", deadline=None, derandomize=True, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("repo")

ACCEPTANCE_LINES = []


@pytest.fixture
def fig1():
    return gen_fig1()


@pytest.fixture
def fig1_with():
    """The two-component resource example with extra declared priorities."""
    def build(*pairs):
        doc = copy.deepcopy(fig1_doc())
        doc["priorities"] = [list(p) for p in pairs]
        return system_from_dict(doc)

    return build


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
