from pathlib import Path

import pytest

DATA = Path(__file__).resolve().parents[1] / "src" / "mdlearn" / "data"

# lines appended by test_acceptance, echoed at the end of every run
ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def data_dir() -> Path:
    return DATA


@pytest.fixture
def going_to_spec():
    from mdlearn.constructions import build_spec

    return build_spec(
        "going_to", 7,
        [("infinitive", [("contracted", True, 300), ("full", True, 600)]),
         ("preposition", [("contracted", False, 0), ("full", True, 100)])],
        ("infinitive", "contracted"),
    )


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
