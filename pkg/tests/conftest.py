import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: multi-seed end-to-end runs")


@pytest.fixture
def tmp_graph(tmp_path):
    """Write text to a temporary file and return its path."""

    def write(text: str, name: str = "g.el"):
        p = tmp_path / name
        p.write_text(text)
        return p

    return write


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    lines = getattr(module, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
