import numpy as np
import pytest

from palmid import generate_synthetic

_ACCEPTANCE = []


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def small_dataset():
    return generate_synthetic(persons=6, samples_per_person=5, width=32, height=32, noise_sigma=4.0, seed=7)


@pytest.fixture
def acceptance():
    def record(criterion, ok, detail=""):
        _ACCEPTANCE.append(("PASS" if ok else "FAIL", criterion, detail))
        assert ok, f"{criterion}: {detail}"

    def skip(criterion, reason):
        _ACCEPTANCE.append(("SKIP", criterion, reason))
        pytest.skip(f"{criterion}: {reason}")

    record.skip = skip
    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for status, criterion, detail in _ACCEPTANCE:
        terminalreporter.write_line(f"{status}  {criterion}  {detail}")
