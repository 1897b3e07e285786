import numpy as np
import pytest

from formantrack.signal_io import SynthVowelSpec, gen_vowel

VOWEL_FORMANTS = [(500.0, 60.0), (1500.0, 90.0), (2500.0, 120.0)]

# one line per acceptance criterion, filled by test_acceptance
ACCEPTANCE_LINES = []


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


@pytest.fixture(scope="session")
def vowel():
    return gen_vowel(SynthVowelSpec(100.0, VOWEL_FORMANTS, 1.0, 1.0), 8000.0)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
