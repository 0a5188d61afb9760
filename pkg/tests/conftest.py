import numpy as np
import pytest

from friridge import bench
from friridge.tfr import AnalysisConfig


@pytest.fixture(scope="session")
def default_config():
    return bench.default_config()


@pytest.fixture(scope="session")
def clean_signal(default_config):
    return bench.build_signal(default_config)


@pytest.fixture(scope="session")
def analysis_config():
    return AnalysisConfig()


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


#: one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
