"""Shared fixtures and the acceptance-criterion summary hook."""

import numpy as np
import pytest

from impulselab import SystemSpec, constant_drift, linear_reset

_CRITERION_LINES: dict[int, str] = {}


def record_criterion(number: int, passed: bool, detail: str) -> None:
    word = "PASS" if passed else "FAIL"
    _CRITERION_LINES[number] = f"criterion {number:02d} {word}: {detail}"


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _CRITERION_LINES:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for number in sorted(_CRITERION_LINES):
        terminalreporter.write_line(_CRITERION_LINES[number])


@pytest.fixture(scope="session")
def halving_spec() -> SystemSpec:
    """Constant drift 0.2 with the halving reset on the quarter-turn wedge."""
    return SystemSpec.from_models(
        constant_drift(0.2), linear_reset(0.5), alpha=float(np.pi / 2), r0=1.0
    )
