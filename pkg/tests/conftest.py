import os
import random
from pathlib import Path

import pytest
from hypothesis import settings

DATA = Path(__file__).parent / "data"

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


def seed_value() -> int:
    return int(os.environ.get("PSATZ_SEED", "20240601"))


@pytest.fixture
def rng():
    return random.Random(seed_value())


@pytest.fixture
def data_dir():
    return DATA


_CRITERIA = pytest.StashKey[list]()


@pytest.fixture
def record_criterion(request):
    """Store one PASS/FAIL line per acceptance criterion for the terminal summary."""
    lines = request.config.stash.setdefault(_CRITERIA, [])

    def record(number, ok, detail, seconds, budget):
        ok = ok and (budget is None or seconds < budget)
        limit = f" (budget {budget:g} s)" if budget is not None else ""
        lines.append(f"criterion {number}: {'PASS' if ok else 'FAIL'}: {detail}; {seconds:.2f} s{limit}")
        return ok

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_CRITERIA, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
