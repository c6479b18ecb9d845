import numpy as np
import pytest

from core.group_core import BackendSpec, identity, parse_element
from core.mif_engine import Calibration
from core.mixed_words import parse_mixed
from core.random_walk import uniform_measure


def naive_free_reduce(text: str) -> str:
    """Cancel adjacent inverse pairs until none remain."""
    changed = True
    while changed:
        changed = False
        for i in range(len(text) - 1):
            if text[i] == text[i + 1].swapcase():
                text = text[:i] + text[i + 2:]
                changed = True
                break
    return text


@pytest.fixture
def f2():
    return BackendSpec.free_group(2)


@pytest.fixture
def f3():
    return BackendSpec.free_group(3)


@pytest.fixture
def e(f2):
    return identity(f2)


@pytest.fixture
def el(f2):
    """Parse an F_2 element."""
    return lambda text: parse_element(text, f2)


@pytest.fixture
def mw(f2):
    """Parse an F_2 mixed word."""
    return lambda text: parse_mixed(text, f2)


@pytest.fixture
def uniform(f2):
    return uniform_measure(f2)


@pytest.fixture
def calibration():
    return Calibration(lambda_hat=0.45, c1_hat=2.0, c_delta=1.0, master_seed=7)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)
