"""Shared fixtures."""

import numpy as np
import pytest

from coopmimo.config import SimConfig


@pytest.fixture
def cfg():
    """Default simulation setup."""
    return SimConfig()


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
