import numpy as np
import pytest

from dragflow.dataset import build_corpus
from dragflow.envs import DRAG_DOMAINS, Domain


@pytest.fixture(scope="session")
def small_corpus():
    """Two train and two eval episodes for every domain, clicks included."""
    return build_corpus(2, 2, seed=3, domains=list(DRAG_DOMAINS) + [Domain.CLICK])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE: list[tuple[int, bool, str]] = []


@pytest.fixture
def criterion():
    """Record one acceptance criterion outcome; the summary prints them in order."""

    def record(number: int, passed: bool, detail: str) -> bool:
        ACCEPTANCE.append((number, bool(passed), detail))
        print(f"criterion {number}: {'PASS' if passed else 'FAIL'} {detail}")
        return bool(passed)

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number, passed, detail in sorted(ACCEPTANCE):
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}")
