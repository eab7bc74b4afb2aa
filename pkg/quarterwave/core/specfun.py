"""
Special functions behind the free Green function 𝔊(k)(r) = K0(-ikr) / 2π.

All complex evaluations use the principal branch. Arguments of the form -ikr with Im k >= 0 always satisfy
|arg w| <= π/2, so callers only ever hit the principal sheet; the checks here guard against misuse.
"""

import logging
import typing

import numpy as np
import scipy.special

from quarterwave.core.exceptions import BranchError, SingularityError, SplitRangeError

log = logging.getLogger(__name__)

EULER_GAMMA = float(np.euler_gamma)
LN2_MINUS_GAMMA = float(np.log(2.0) - np.euler_gamma)
SPLIT_RADIUS = 8.0 #Series split is used up to this modulus, direct evaluation above
_SERIES_TERMS = 40 #(|w|^2/4)^m/(m!)^2 < 1e-28 at m=40 for |w| <= 8

ArrayLike = typing.Union[complex, float, np.ndarray]


def _as_complex_array(w : ArrayLike) -> np.ndarray:
	return np.asarray(w, dtype=complex)


def _check_principal(w : np.ndarray, allow_zero : bool = False):
	"""Raise when any entry of w sits at 0 or on the negative real axis"""
	if not allow_zero and np.any(w == 0):
		raise SingularityError("K0 has a logarithmic singularity at w=0")
	on_cut = (w.imag == 0) & (w.real < 0)
	if np.any(on_cut):
		bad = w[on_cut].ravel()[0]
		raise BranchError(f"Argument {bad} lies on the branch cut (negative real axis) of K0")


def _unwrap(result : np.ndarray, like : ArrayLike):
	if np.ndim(like) == 0:
		return result[()]
	return result


def bessel_K0(w : ArrayLike) -> ArrayLike:
	"""Modified Bessel function of the second kind, order 0, on the principal branch.

	Args:
		w (complex | np.ndarray): argument(s), nonzero and off the negative real axis

	Raises:
		SingularityError: if any w == 0
		BranchError: if any w is on the negative real axis

	Returns:
		complex | np.ndarray: K0(w)
	"""
	w_arr = _as_complex_array(w)
	_check_principal(w_arr)
	return _unwrap(scipy.special.kv(0, w_arr), w)


def bessel_K1(w : ArrayLike) -> ArrayLike:
	"""Modified Bessel function of the second kind, order 1 (principal branch). Same domain as bessel_K0."""
	w_arr = _as_complex_array(w)
	_check_principal(w_arr)
	return _unwrap(scipy.special.kv(1, w_arr), w)


def bessel_I0(w : ArrayLike) -> ArrayLike:
	"""Modified Bessel function of the first kind, order 0 (entire)"""
	return _unwrap(scipy.special.iv(0, _as_complex_array(w)), w)


def bessel_J0(x : ArrayLike) -> ArrayLike:
	"""Bessel function of the first kind, order 0, for real x. Evaluated at |x| so evenness holds exactly."""
	x_arr = np.abs(np.asarray(x, dtype=float))
	return _unwrap(scipy.special.j0(x_arr), x)


def bessel_J1(x : ArrayLike) -> ArrayLike:
	"""Bessel function of the first kind, order 1, for real x (odd)"""
	x_arr = np.asarray(x, dtype=float)
	return _unwrap(np.sign(x_arr) * scipy.special.j1(np.abs(x_arr)), x)


def bessel_Y0(x : ArrayLike) -> ArrayLike:
	"""Bessel function of the second kind, order 0, for real x > 0"""
	x_arr = np.asarray(x, dtype=float)
	if np.any(x_arr <= 0):
		raise BranchError("Y0 is only evaluated for x > 0")
	return _unwrap(scipy.special.y0(x_arr), x)


def hankel_H0(x : ArrayLike) -> ArrayLike:
	"""Hankel function of the first kind H0^(1)(x) = J0(x) + iY0(x) for real x > 0"""
	x_arr = np.asarray(x, dtype=float)
	if np.any(x_arr <= 0):
		raise BranchError("H0 is only evaluated for x > 0")
	return _unwrap(scipy.special.hankel1(0, x_arr), x)


def k0_log_split(w : ArrayLike, split_radius : float = SPLIT_RADIUS) -> typing.Tuple[ArrayLike, ArrayLike]:
	"""Split K0 into its logarithmic and analytic parts,

		K0(w) = log_coefficient * ln(w) + smooth_remainder,

	with log_coefficient = -I0(w) and
	smooth_remainder = (ln 2 - γ) I0(w) + Σ_{m>=1} (w²/4)^m / (m!)² H_m   (H_m the harmonic numbers).

	Both parts are entire in w, so w = 0 is allowed and returns (-1, ln 2 - γ).

	Args:
		w (complex | np.ndarray): argument(s) with |w| <= split_radius
		split_radius (float, optional): largest modulus accepted. Defaults to SPLIT_RADIUS.

	Raises:
		SplitRangeError: if any |w| exceeds split_radius

	Returns:
		typing.Tuple[complex | np.ndarray, complex | np.ndarray]: (log_coefficient, smooth_remainder)
	"""
	w_arr = _as_complex_array(w)
	if np.any(np.abs(w_arr) > split_radius):
		raise SplitRangeError(f"k0_log_split called with |w|={np.max(np.abs(w_arr)):.4g} > split radius "
			f"{split_radius}, use bessel_K0 instead")

	quarter_sq = w_arr * w_arr / 4.0
	term = np.ones_like(w_arr)
	i0_sum = np.ones_like(w_arr)
	harmonic_sum = np.zeros_like(w_arr)
	harmonic = 0.0
	for m in range(1, _SERIES_TERMS + 1):
		term = term * quarter_sq / (m * m)
		harmonic += 1.0 / m
		i0_sum = i0_sum + term
		harmonic_sum = harmonic_sum + term * harmonic

	log_coefficient = -i0_sum
	smooth_remainder = LN2_MINUS_GAMMA * i0_sum + harmonic_sum
	return _unwrap(log_coefficient, w), _unwrap(smooth_remainder, w)


def k0_recombined(w : ArrayLike, split_radius : float = SPLIT_RADIUS) -> ArrayLike:
	"""Evaluate K0 from its series split (only used to cross-check the split against bessel_K0)"""
	w_arr = _as_complex_array(w)
	_check_principal(w_arr)
	log_coefficient, smooth = k0_log_split(w_arr, split_radius)
	return _unwrap(log_coefficient * np.log(w_arr) + smooth, w)
