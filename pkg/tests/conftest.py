"""
Shared fixtures: synthetic Case (I)/(II) inputs, a generic input without
cancellations, and the reference croissant potential.
"""

from pathlib import Path

import numpy as np
import pytest

from dynamics.potential import PotentialSpec
from spectral.synthetic import reference_input

CONFIG_DIR = Path(__file__).resolve().parents[1] / "configs"


@pytest.fixture(scope="session")
def case_II_input():
    return reference_input('II')


@pytest.fixture(scope="session")
def case_I_input():
    return reference_input('I')


@pytest.fixture(scope="session")
def generic_input():
    return reference_input('generic')


@pytest.fixture(scope="session")
def reference_potential():
    return PotentialSpec.reference().validate()


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def config_dir():
    return CONFIG_DIR
