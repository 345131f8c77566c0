import numpy as np
import pytest
from hypothesis import settings

from ode_mmse import ChannelMatrix, SystemConfig, gram_eigensystem, make_rng, sample_channel

settings.register_profile("default", deadline=None, max_examples=50)
settings.load_profile("default")


def random_channel(n, m=None, seed=0):
    m = n if m is None else m
    return sample_channel(SystemConfig(n, m, 1.0, seed), make_rng(seed))


def random_vector(k, seed):
    rng = make_rng(seed, 99)
    return (rng.standard_normal(k) + 1j * rng.standard_normal(k)) / np.sqrt(2)


@pytest.fixture
def channel8():
    return random_channel(8, seed=11)


@pytest.fixture
def eig8(channel8):
    return gram_eigensystem(channel8)


@pytest.fixture
def identity2():
    return ChannelMatrix(np.eye(2))


_ACCEPTANCE = []


@pytest.fixture
def report():
    """Record one acceptance line; shown in the terminal summary."""

    def record(label, passed, detail):
        _ACCEPTANCE.append(f"{'PASS' if passed else 'FAIL'} {label}: {detail}")
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE:
            terminalreporter.write_line(line)
