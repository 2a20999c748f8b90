import os

import pytest

ACCEPTANCE_LINES: list[str] = []


def pytest_collection_modifyitems(config, items):
    if os.environ.get("SPINBATTERY_TIER", "ci") == "full":
        return
    skip = pytest.mark.skip(reason="long tier; set SPINBATTERY_TIER=full")
    for item in items:
        if "full_tier" in item.keywords:
            item.add_marker(skip)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
