import numpy as np
import pytest

from offloadsim import GeneratorConfig, PathLoss, Rayleigh, SystemParams, generate

CRITERIA_LINES = []


@pytest.fixture
def report():
    """Record one acceptance line; printed in the terminal summary."""

    def _report(label, ok, detail=""):
        CRITERIA_LINES.append(f"{'PASS' if ok else 'FAIL'}  criterion {label}: {detail}")
        return ok

    return _report


def pytest_terminal_summary(terminalreporter):
    if CRITERIA_LINES:
        terminalreporter.section("acceptance criteria")
        for line in CRITERIA_LINES:
            terminalreporter.write_line(line)


def random_scenarios(count, max_n, seed=0, min_n=1, params=SystemParams()):
    """Alternating path-loss and Rayleigh scenarios with random user counts."""
    rng = np.random.default_rng(seed)
    for i in range(count):
        n = int(rng.integers(min_n, max_n + 1))
        model = PathLoss() if i % 2 == 0 else Rayleigh(1.0)
        yield generate(GeneratorConfig(n, model, params, int(rng.integers(2**63))))
