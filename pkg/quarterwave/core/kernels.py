"""
Free Green function of the plane, its four-image (Neumann) symmetrization on the quarter plane and the integral
kernels of the boundary operators B0(k), B1(k)* and B(k):

	B0(x, y)     =  √|σ(x)| · 𝔊⁽⁰⁾(k)(x, y)                         x on the boundary, y in the quarter plane
	B1star(x, y) = -sgn(σ(y))√|σ(y)| · 𝔊⁽⁰⁾(k)(x, y)                 x in the quarter plane, y on the boundary
	B(x, y)      = -√|σ(x)| · sgn(σ(y))√|σ(y)| · 𝔊⁽⁰⁾(k)(x, y)       both on the boundary

where 𝔊⁽⁰⁾(k)(x, y) = Σ 𝔊(k)(|x - (±y1, ±y2)|) and 𝔊(k)(r) = K0(-ikr) / 2π.
"""

import logging
import typing
from dataclasses import dataclass
from enum import Enum

import numpy as np

from quarterwave.core import specfun
from quarterwave.core.exceptions import DomainError, SingularityError
from quarterwave.core.potential import BoundaryPotential

log = logging.getLogger(__name__)

INV_2PI = 1.0 / (2.0 * np.pi)


@dataclass(frozen=True)
class Wavenumber():
	"""
	Wavenumber k with Im k >= 0, k != 0; the spectral parameter is z = k².
	on_real_axis marks the limiting-absorption value k + i0 (k real and positive).
	"""
	k : complex
	on_real_axis : bool = False

	def __post_init__(self):
		k = complex(self.k)
		object.__setattr__(self, "k", k)
		if k == 0:
			raise DomainError("Wavenumber k=0 is not allowed (threshold of the continuous spectrum)")
		if k.imag < 0:
			raise DomainError(f"Wavenumber must lie in the closed upper half-plane, got k={k}")
		if self.on_real_axis and (k.imag != 0 or k.real <= 0):
			raise DomainError(f"on_real_axis requires a positive real k, got k={k}")

	@classmethod
	def imaginary(cls, kappa : float) -> 'Wavenumber':
		"""k = iκ, the negative energy -κ²"""
		if kappa <= 0:
			raise DomainError(f"kappa must be positive, got {kappa}")
		return cls(1j * float(kappa))

	@classmethod
	def real(cls, k : float) -> 'Wavenumber':
		"""k + i0 on the positive real axis"""
		return cls(complex(float(k)), on_real_axis=True)

	@classmethod
	def from_energy(cls, z : complex) -> 'Wavenumber':
		"""k = √z with Im k >= 0; z on (0, ∞) gives the limiting-absorption value"""
		z = complex(z)
		if z.imag == 0 and z.real > 0:
			return cls.real(np.sqrt(z.real))
		return cls(1j * np.sqrt(-z))

	@property
	def z(self) -> complex:
		"""Spectral parameter k²"""
		return self.k * self.k

	@property
	def kappa(self) -> float:
		"""Im k (the decay rate of the Green function)"""
		return self.k.imag

	def __str__(self):
		if self.on_real_axis:
			return f"{self.k.real:g}+i0"
		return f"{self.k:g}"


WavenumberLike = typing.Union[Wavenumber, complex, float]


def as_wavenumber(k : WavenumberLike) -> Wavenumber:
	"""Coerce a plain number to a Wavenumber (positive reals are read as k+i0)"""
	if isinstance(k, Wavenumber):
		return k
	k = complex(k)
	if k.imag == 0 and k.real > 0:
		return Wavenumber.real(k.real)
	return Wavenumber(k)


class Axis(Enum):
	"""The two half-line components of the quarter-plane boundary"""
	HORIZONTAL = 0 # points (t, 0)
	VERTICAL = 1 # points (0, t)


@dataclass(frozen=True)
class BoundaryPoint():
	"""A boundary point given by its axis and its distance to the corner"""
	axis : Axis
	coordinate : float

	def __post_init__(self):
		if self.coordinate < 0:
			raise DomainError(f"Boundary coordinate must be non-negative, got {self.coordinate}")

	def to_plane(self) -> 'PlanePoint':
		"""Embed in the plane"""
		if self.axis is Axis.HORIZONTAL:
			return PlanePoint(self.coordinate, 0.0)
		return PlanePoint(0.0, self.coordinate)


@dataclass(frozen=True)
class PlanePoint():
	"""A point in the closed quarter plane"""
	x1 : float
	x2 : float

	def __post_init__(self):
		if self.x1 < 0 or self.x2 < 0:
			raise DomainError(f"Point ({self.x1}, {self.x2}) is outside the closed quarter plane")

	def as_array(self) -> np.ndarray:
		"""(x1, x2) as a float array"""
		return np.array([self.x1, self.x2], dtype=float)


PointLike = typing.Union[PlanePoint, BoundaryPoint, np.ndarray, typing.Sequence[float]]


def as_points(points : PointLike) -> np.ndarray:
	"""Convert a point or an array of shape (..., 2) to a float array of shape (..., 2)"""
	if isinstance(points, BoundaryPoint):
		points = points.to_plane()
	if isinstance(points, PlanePoint):
		return points.as_array()
	arr = np.asarray(points, dtype=float)
	if arr.shape[-1] != 2:
		raise DomainError(f"Expected points with a trailing dimension of 2, got shape {arr.shape}")
	return arr


def green_free(k : WavenumberLike, r : typing.Union[float, np.ndarray]) -> typing.Union[complex, np.ndarray]:
	"""𝔊(k)(r) = K0(-ikr) / 2π.

	Args:
		k (Wavenumber | complex): wavenumber with Im k >= 0
		r (float | np.ndarray): distance(s) > 0

	Raises:
		SingularityError: if any r == 0

	Returns:
		complex | np.ndarray: the free Green function
	"""
	wave = as_wavenumber(k)
	r_arr = np.asarray(r, dtype=float)
	if np.any(r_arr <= 0):
		raise SingularityError("Free Green function evaluated at coincident points (r=0)")
	result = INV_2PI * specfun.bessel_K0(-1j * wave.k * r_arr)
	if np.ndim(r) == 0:
		return complex(result)
	return result


def green_free_derivative(k : WavenumberLike, r : np.ndarray) -> np.ndarray:
	"""d/dr 𝔊(k)(r) = (ik / 2π) K1(-ikr)"""
	wave = as_wavenumber(k)
	r_arr = np.asarray(r, dtype=float)
	if np.any(r_arr <= 0):
		raise SingularityError("Green function gradient evaluated at coincident points (r=0)")
	return 1j * wave.k * INV_2PI * specfun.bessel_K1(-1j * wave.k * r_arr)


def image_offsets(x : np.ndarray, y : np.ndarray) -> np.ndarray:
	"""x - (±y1, ±y2) for the four sign choices, stacked on a new leading axis of length 4"""
	signs = np.array([[1.0, 1.0], [-1.0, 1.0], [1.0, -1.0], [-1.0, -1.0]])
	return np.stack([x - sign * y for sign in signs])


def green_images(k : WavenumberLike, x : PointLike, y : PointLike) -> typing.Union[complex, np.ndarray]:
	"""Four-image Green function 𝔊⁽⁰⁾(k)(x, y) of the Neumann Laplacian on the quarter plane.

	x and y broadcast against each other (PlanePoint/BoundaryPoint or arrays of shape (..., 2)).

	Raises:
		SingularityError: x coincides with y or with one of its images
	"""
	x_arr, y_arr = as_points(x), as_points(y)
	distances = np.linalg.norm(image_offsets(x_arr, y_arr), axis=-1)
	if np.any(distances == 0):
		raise SingularityError("green_images evaluated with x equal to (an image of) y")
	result = green_free(k, distances).sum(axis=0) #type: ignore
	if np.ndim(result) == 0:
		return complex(result)
	return result


def green_images_gradient(k : WavenumberLike, x : PointLike, y : PointLike) -> np.ndarray:
	"""∇ₓ 𝔊⁽⁰⁾(k)(x, y), returned with a trailing axis of length 2"""
	x_arr, y_arr = as_points(x), as_points(y)
	offsets = image_offsets(x_arr, y_arr)
	distances = np.linalg.norm(offsets, axis=-1)
	if np.any(distances == 0):
		raise SingularityError("green_images_gradient evaluated with x equal to (an image of) y")
	radial = green_free_derivative(k, distances) / distances
	return (radial[..., None] * offsets).sum(axis=0)


def boundary_green(k : WavenumberLike,
		axis_x : typing.Union[Axis, np.ndarray], s : np.ndarray,
		axis_y : typing.Union[Axis, np.ndarray], t : np.ndarray
	) -> np.ndarray:
	"""𝔊⁽⁰⁾(k) between two boundary points, using the image coincidences

		same axis:  2𝔊(|s - t|) + 2𝔊(s + t)
		cross axis: 4𝔊(√(s² + t²))
	"""
	def _axis_code(axis):
		if isinstance(axis, Axis):
			return axis.value
		return np.asarray(axis)
	same, s_arr, t_arr = np.broadcast_arrays(_axis_code(axis_x) == _axis_code(axis_y),
		np.asarray(s, dtype=float), np.asarray(t, dtype=float))
	result = np.empty(same.shape, dtype=complex)
	result[same] = 2.0 * green_free(k, np.abs(s_arr[same] - t_arr[same])) + 2.0 * green_free(k, s_arr[same] + t_arr[same])
	cross = ~same
	result[cross] = 4.0 * green_free(k, np.hypot(s_arr[cross], t_arr[cross]))
	return result


class KernelVariant(Enum):
	"""The three boundary-operator kernels"""
	B0 = "B0"
	B1STAR = "B1star"
	B = "B"


def kernel_entry(k : WavenumberLike,
		variant : KernelVariant | str,
		x : PointLike,
		y : PointLike,
		pot : BoundaryPotential
	) -> typing.Union[complex, np.ndarray]:
	"""Integral kernel of B0(k), B1(k)* or B(k).

	Args:
		k (WavenumberLike): the wavenumber
		variant (KernelVariant | str): "B0" (x boundary, y plane), "B1star" (x plane, y boundary) or "B" (both on
			the boundary)
		x (PointLike): first argument
		y (PointLike): second argument
		pot (BoundaryPotential): the boundary potential

	Raises:
		DomainError: a BoundaryPoint was expected but a plane point off the boundary was given
		SingularityError: coincident arguments

	Returns:
		complex | np.ndarray: the kernel value(s)
	"""
	variant = KernelVariant(variant)
	if variant is KernelVariant.B0:
		return boundary_weight(x, pot, signed=False) * green_images(k, x, y)
	if variant is KernelVariant.B1STAR:
		return -boundary_weight(y, pot, signed=True) * green_images(k, x, y)
	return -boundary_weight(x, pot, signed=False) * boundary_weight(y, pot, signed=True) * green_images(k, x, y)


def boundary_coordinate(point : PointLike) -> np.ndarray:
	"""Distance to the corner of a boundary point (raises if the point is not on the boundary)"""
	if isinstance(point, BoundaryPoint):
		return np.asarray(point.coordinate)
	arr = as_points(point)
	on_boundary = (arr[..., 0] == 0) | (arr[..., 1] == 0)
	if not np.all(on_boundary):
		raise DomainError("Boundary kernel argument is not on the quarter-plane boundary")
	return arr[..., 0] + arr[..., 1]


def boundary_weight(point : PointLike, pot : BoundaryPotential, signed : bool) -> np.ndarray:
	"""√|σ| (or sgn(σ)√|σ| when signed) at a boundary point"""
	coordinate = boundary_coordinate(point)
	if signed:
		return pot.signed_sqrt(coordinate)
	return pot.sqrt_abs(coordinate)


def reflect_plane(func : typing.Callable[[np.ndarray], np.ndarray]) -> typing.Callable[[np.ndarray], np.ndarray]:
	"""Even extension ℛu(x) = ½u(|x1|, |x2|) of a quarter-plane function to the whole plane (unitary)"""
	def reflected(points : np.ndarray) -> np.ndarray:
		return 0.5 * func(np.abs(as_points(points)))
	return reflected


def reflect_boundary(func : typing.Callable[[np.ndarray], np.ndarray]) -> typing.Callable[[np.ndarray], np.ndarray]:
	"""Even extension ℛ_bv φ(t) = ½φ(|t|) of a half-line function to the full line"""
	def reflected(t : np.ndarray) -> np.ndarray:
		return 0.5 * func(np.abs(np.asarray(t, dtype=float)))
	return reflected


def boundary_fourier_transform(func : typing.Callable[[np.ndarray], np.ndarray],
		xi : typing.Union[float, np.ndarray],
		support : float,
		breakpoints : typing.Sequence[float] = (),
		panels : int = 16,
		order : int = 24
	) -> np.ndarray:
	"""𝓕(ℛ_bv g)(ξ) = (1/√2π)∫ℝ ½g(|t|)e^{-iξt}dt = (1/√2π)∫₀^∞ g(y)cos(ξy)dy.

	Computed by composite Gauss-Legendre quadrature on [0, support] with panel edges at the breakpoints of g.

	Args:
		func (typing.Callable): g on [0, ∞), vectorized
		xi (float | np.ndarray): frequencies
		support (float): g vanishes beyond this radius
		breakpoints (typing.Sequence[float], optional): points where g is not smooth. Defaults to ().
		panels (int, optional): panels per smooth piece. Defaults to 16.
		order (int, optional): Gauss-Legendre order per panel. Defaults to 24.
	"""
	edges = sorted({0.0, float(support), *[b for b in breakpoints if 0 < b < support]})
	ref_nodes, ref_weights = np.polynomial.legendre.leggauss(order)
	nodes, weights = [], []
	for left, right in zip(edges[:-1], edges[1:]):
		for a, b in zip(np.linspace(left, right, panels + 1)[:-1], np.linspace(left, right, panels + 1)[1:]):
			nodes.append(0.5 * (b - a) * ref_nodes + 0.5 * (a + b))
			weights.append(0.5 * (b - a) * ref_weights)
	if not nodes:
		return np.zeros_like(np.asarray(xi, dtype=float), dtype=float)
	y = np.concatenate(nodes)
	w = np.concatenate(weights)
	xi_arr = np.asarray(xi, dtype=float)
	values = np.cos(np.multiply.outer(xi_arr, y)) @ (w * func(y))
	return values / np.sqrt(2.0 * np.pi)
