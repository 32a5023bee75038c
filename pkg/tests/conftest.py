from pathlib import Path

import pytest

from aletheia.providers import Cassette, ReplayTransport

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture
def replay():
    """Build a strict replay transport for a shipped cassette by file name."""

    def make(name: str) -> ReplayTransport:
        return ReplayTransport(Cassette.load(FIXTURES / name))

    return make


# Acceptance verdict lines, printed again at the end of the session so they survive output capture.
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
