import pytest

from galmorph import synth
from galmorph.pipeline import build_features, standardize_all

# (number, title, passed, detail) lines from the acceptance suite
ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def synth_set():
    """The default 131-image synthetic set: (images, labels)."""
    return synth.generate_dataset()


@pytest.fixture(scope="session")
def standardized_set(synth_set):
    images, labels = synth_set
    return standardize_all(images), labels


@pytest.fixture(scope="session")
def feature_source(standardized_set):
    images, labels = standardized_set
    return build_features(images, labels)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, passed, detail in sorted(ACCEPTANCE_LINES):
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"[{status}] criterion {number}: {title} -- {detail}")
