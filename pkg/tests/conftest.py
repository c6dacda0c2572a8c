"""Shared test configuration and the acceptance-summary hook."""
from __future__ import annotations

from hypothesis import settings

settings.register_profile("suite", deadline=None, max_examples=50)
settings.load_profile("suite")

# Acceptance tests register one entry per criterion; the terminal
# summary prints a single pass/fail line for each so the outcome of
# every criterion is visible even when the run is otherwise green.
ACCEPTANCE_RESULTS: dict[int, tuple[str, bool, str]] = {}


def register_criterion(number: int, title: str, passed: bool, detail: str = "") -> None:
    ACCEPTANCE_RESULTS[number] = (title, bool(passed), detail)


def pytest_terminal_summary(terminalreporter, exitstatus, config) -> None:
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_RESULTS):
        title, passed, detail = ACCEPTANCE_RESULTS[number]
        status = "PASS" if passed else "FAIL"
        line = f"[{status}] criterion {number}: {title}"
        if detail:
            line = f"{line} ({detail})"
        terminalreporter.write_line(line)
