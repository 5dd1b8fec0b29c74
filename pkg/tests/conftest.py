import math

import numpy as np
import pytest

from cavity_qfi import bogoliubov as bg


@pytest.fixture(scope="session")
def synth():
    return bg.provider_synthetic(3)


@pytest.fixture(scope="session")
def synth_compact():
    # every coupling stays inside a ±4 Fock window
    return bg.provider_synthetic(3, support=4)


@pytest.fixture
def rng():
    return np.random.default_rng(42)


def nu_of(k: int) -> int:
    return 1 if k >= 0 else -1


THETAS = (math.pi / 8, math.pi / 4, 3 * math.pi / 8)
