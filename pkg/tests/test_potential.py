import json
import math

import numpy as np
import numpy.testing as npt
import pytest

from quarterwave.core import potential
from quarterwave.core.exceptions import DomainError, PotentialConfigError
from quarterwave.core.potential import BoundaryPotential


def test_step_from_config():
	pot = potential.from_config('{"shape":"step","sigma0":1.0,"L":1.0,"alpha":0.01}')
	assert pot.shape == "step"
	npt.assert_allclose(pot.eval(np.array([0.0, 0.5, 1.0, 1.5])), [0.01, 0.01, 0.01, 0.0])
	assert pot.breakpoints() == [1.0]


def test_table_from_config_interpolates():
	pot = potential.from_config({"shape": "table", "points": [[0, 1], [1, 0.5], [2, 0]], "alpha": 1, "epsilon": 1})
	npt.assert_allclose(pot.eval(np.array([0.5, 1.5, 3.0])), [0.75, 0.25, 0.0])


def test_exponential_support_radius():
	pot = BoundaryPotential.exponential(sigma0=1.0, mu=2.0)
	npt.assert_allclose(pot.support_radius(1e-8), math.log(1e8) / 2.0, rtol=1e-14)


def test_step_support_radius():
	pot = BoundaryPotential.step(sigma0=-2.0, L=3.0)
	assert pot.support_radius(1e-10) == 3.0
	assert pot.with_alpha(0.0).support_radius(1e-10) == 0.0


def test_table_support_radius_is_interpolated():
	pot = BoundaryPotential.table([[0, 1], [1, 0.5], [2, 0]])
	npt.assert_allclose(pot.support_radius(0.25), 1.5)


@pytest.mark.parametrize("document, field_name", [
	({"shape": "step", "sigma0": 1.0}, "L"),
	({"shape": "step", "sigma0": 1.0, "L": 1.0, "width": 2.0}, "width"),
	({"shape": "circle"}, "shape"),
	({"shape": "step", "sigma0": 1.0, "L": -1.0}, "L"),
	({"shape": "exponential", "sigma0": 1.0, "mu": 1.0, "alpha": -0.5}, "alpha"),
	({"shape": "table", "points": [[0, 1], [0, 2]]}, "points"),
])
def test_invalid_documents_name_the_field(document, field_name):
	with pytest.raises(PotentialConfigError) as info:
		potential.from_config(document)
	assert info.value.field_name == field_name
	assert field_name in str(info.value)


def test_malformed_json():
	with pytest.raises(PotentialConfigError):
		potential.from_config("{shape: step")


def test_negative_coordinate_is_rejected():
	with pytest.raises(DomainError):
		BoundaryPotential.step(1.0, 1.0).eval(-0.1)


def test_signed_sqrt():
	pot = BoundaryPotential.step(sigma0=-4.0, L=1.0)
	npt.assert_allclose(pot.signed_sqrt(np.array([0.5, 2.0])), [-2.0, 0.0])
	npt.assert_allclose(pot.sqrt_abs(np.array([0.5])), [2.0])


def test_config_round_trip():
	pot = BoundaryPotential.exponential(sigma0=0.5, mu=3.0, alpha=0.2, epsilon=2.0)
	assert potential.from_config(pot.to_json()) == pot
	assert json.loads(pot.to_json())["shape"] == "exponential"


def test_from_file(step_path):
	pot = potential.from_file(step_path)
	assert pot == BoundaryPotential.step(1.0, 1.0, alpha=1.0)


def test_from_missing_file(tmp_path):
	with pytest.raises(PotentialConfigError):
		potential.from_file(str(tmp_path / "missing.json"))


@pytest.mark.parametrize("pot", [
	BoundaryPotential.step(sigma0=1.5, L=2.0),
	BoundaryPotential.exponential(sigma0=0.5, mu=3.0),
	BoundaryPotential.table([(0, 1), (1, -0.5), (2, 0)]),
])
def test_eval_is_linear_in_the_coupling(pot):
	x = np.linspace(0.0, 3.0, 31)
	for a, b in [(3.0, 0.25), (0.5, 0.7), (0.0, 5.0)]:
		npt.assert_allclose(pot.with_alpha(a * b).eval(x), a * pot.with_alpha(b).eval(x), rtol=1e-15, atol=0)


def test_changes_sign():
	assert BoundaryPotential.table([(0, 1), (1, -1), (2, 0)]).changes_sign()
	assert not BoundaryPotential.table([(0, 1), (1, -1), (2, 0)], alpha=0.0).changes_sign()
	assert not BoundaryPotential.table([(0, -1), (1, 0), (2, -2)]).changes_sign()
	assert not BoundaryPotential.step(sigma0=-1.0, L=1.0).changes_sign()
	assert not BoundaryPotential.exponential(sigma0=-2.0, mu=1.0).changes_sign()
