import numpy as np
import numpy.testing as npt
import pytest

from quarterwave.core import specfun
from quarterwave.core.exceptions import BranchError, SingularityError, SplitRangeError


def test_k0_reference_value():
	npt.assert_allclose(specfun.bessel_K0(1.0), 0.42102443824070834, rtol=1e-14)


def test_j0_first_zero():
	assert abs(specfun.bessel_J0(2.404825557695773)) < 1e-15


def test_j0_is_even():
	x = np.linspace(0.1, 20, 50)
	npt.assert_array_equal(specfun.bessel_J0(-x), specfun.bessel_J0(x))


@pytest.mark.parametrize("x", [0.5, 3.0, 12.0])
def test_k0_on_negative_imaginary_axis_is_hankel(x):
	npt.assert_allclose(specfun.bessel_K0(-1j * x), 0.5j * np.pi * specfun.hankel_H0(x), rtol=1e-12)


def test_hankel_connection():
	x = np.array([0.3, 1.0, 7.5])
	npt.assert_allclose(specfun.hankel_H0(x), specfun.bessel_J0(x) + 1j * specfun.bessel_Y0(x), rtol=1e-14)


@pytest.mark.parametrize("w", [0.1, 1 + 1j, -2j, 3.0, 0.5 - 0.25j])
def test_log_split_recombines_to_k0(w):
	npt.assert_allclose(specfun.k0_recombined(w), specfun.bessel_K0(w), rtol=1e-12, atol=1e-13)


def test_log_split_at_zero():
	log_coefficient, smooth = specfun.k0_log_split(0.0)
	npt.assert_allclose(log_coefficient, -1.0)
	npt.assert_allclose(smooth, np.log(2.0) - np.euler_gamma)


def test_log_split_outside_radius():
	with pytest.raises(SplitRangeError):
		specfun.k0_log_split(specfun.SPLIT_RADIUS + 1.0)


def test_k0_domain_errors():
	with pytest.raises(SingularityError):
		specfun.bessel_K0(0.0)
	with pytest.raises(BranchError):
		specfun.bessel_K0(-1.0)
	with pytest.raises(BranchError):
		specfun.bessel_Y0(0.0)


def test_array_shapes_are_kept():
	w = np.full((3, 4), 1.0 + 0.5j)
	assert specfun.bessel_K0(w).shape == (3, 4)
	assert np.ndim(specfun.bessel_K0(2.0)) == 0


def test_k0_large_argument_asymptotics():
	w = np.linspace(10.0, 100.0, 91)
	ratio = specfun.bessel_K0(w) / (np.sqrt(np.pi / (2.0 * w)) * np.exp(-w))
	#Leading correction is -1/(8w), the next one 9/(128w²)
	assert np.all(np.abs((ratio - 1.0) * 8.0 * w + 1.0) <= 0.6 / w)
	assert np.all(np.abs(ratio[w >= 12.5] - 1.0) <= 0.01)
