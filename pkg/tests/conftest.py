import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def dense_max(f, n=200001):
    """Independent oracle: max |f| on a dense grid over one period."""
    from rodov import piecewise as pw

    t = np.linspace(0.0, f.period, n)
    return float(np.max(np.abs(pw.evaluate(f, t))))


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def record_criterion():
    """Record one pass/fail line per acceptance criterion; printed in the terminal summary."""

    def record(number: int, title: str, checks: dict[str, tuple[bool, str]]):
        ok = all(passed for passed, _ in checks.values())
        detail = "; ".join(f"{name}: {'ok' if passed else 'FAIL'} ({info})" for name, (passed, info) in checks.items())
        line = f"criterion {number} {title}: {'PASS' if ok else 'FAIL'} | {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
