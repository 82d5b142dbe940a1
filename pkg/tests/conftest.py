import pathlib
import sys

import pytest

HERE = pathlib.Path(__file__).parent
sys.path.insert(0, str(HERE))

from cycletab.engine import Engine  # noqa: E402

PROGRAMS = HERE / "programs"


def program_text(name: str) -> str:
    return (PROGRAMS / name).read_text()


@pytest.fixture
def load():
    """``load("bin.pl", max_depth=...)`` -> a fresh engine with that program."""

    def make(name, **options):
        return Engine(program_text(name), **options)

    return make


# acceptance results, filled in by test_acceptance.py and printed at the end
ACCEPTANCE: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
