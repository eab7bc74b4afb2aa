"""Shared fixtures: the shipped potentials and their boundary grids"""
import os

import pytest

import quarterwave.examples
from quarterwave.core.nystrom import build_grid
from quarterwave.core.potential import BoundaryPotential

POTENTIAL_DIRECTORY = os.path.join(os.path.dirname(quarterwave.examples.__file__), "potentials")


@pytest.fixture(scope="session")
def step_path():
	"""Path of the shipped step potential document"""
	return os.path.join(POTENTIAL_DIRECTORY, "step.json")


@pytest.fixture(scope="session")
def exponential_path():
	"""Path of the shipped exponential potential document"""
	return os.path.join(POTENTIAL_DIRECTORY, "exponential.json")


@pytest.fixture(scope="module")
def step_pot():
	"""σ = 1 on [0, 1]"""
	return BoundaryPotential.step(sigma0=1.0, L=1.0)


@pytest.fixture(scope="module")
def step_grid(step_pot):
	"""Default boundary grid of the step potential"""
	return build_grid(step_pot)
