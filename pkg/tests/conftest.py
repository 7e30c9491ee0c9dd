from __future__ import annotations

import numpy as np
import pytest

import oracles
from eigenfid import QubitChannel


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20260816)


def random_channel(rng: np.random.Generator) -> QubitChannel:
    """Random CPTP qubit channel built from an independent Stinespring oracle."""
    e00, e01, e10, e11 = oracles.random_cptp_images(rng)
    return QubitChannel(e00, e01, e10, e11)
