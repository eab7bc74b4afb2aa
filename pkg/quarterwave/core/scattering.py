"""
Generalized eigenfunctions and the on-shell scattering amplitude of the Robin Laplacian.

An incoming symmetrized plane wave S(x) = 4cos(k1·x1)cos(k2·x2) is scattered into

	ψ⁺ = S + single layer of ρ,    ρ = sgn(σ)√|σ|·h,    (1 + B(k+i0))h = √|σ|·S on the boundary,

and the amplitude f(k, ω, ω') is the coefficient of e^{ikr}/√r in ψ⁺ - S along the direction ω'.
"""

import logging
import typing
from dataclasses import dataclass
from enum import Enum

import numpy as np

from quarterwave.core.exceptions import DomainError
from quarterwave.core.kernels import PointLike, Wavenumber, as_points, boundary_fourier_transform
from quarterwave.core.nystrom import BoundaryGrid, KernelMatrix, assemble, build_grid, layer_potential
from quarterwave.core.potential import BoundaryPotential

log = logging.getLogger(__name__)

DEFAULT_FAR_FIELD_RADIUS = 40.0 #In units of 1/k
LOW_ENERGY_REFERENCE = 128.0 / np.pi
_UNIT_TOLERANCE = 1e-9
_SUPPORT_THRESHOLD = 1e-17 #Relative truncation of σ for the cosine transform


class Normalization(Enum):
	"""
	Prefactor convention of the amplitude. FAR_FIELD follows the definition of f as the far-field coefficient,
	DISPLAYED reproduces the prefactor of the commonly quoted closed formula, which differs from it by a sign for
	the full amplitude and by a factor -2 for the weak-coupling sum.
	"""
	FAR_FIELD = "far_field"
	DISPLAYED = "displayed"


class AmplitudeMethod(Enum):
	"""How an amplitude was computed"""
	FULL = "full"
	WEAK_COUPLING = "weak_coupling"


def _unit_vector(direction : typing.Sequence[float], name : str) -> typing.Tuple[float, float]:
	vector = (float(direction[0]), float(direction[1]))
	if abs(np.hypot(*vector) - 1.0) > _UNIT_TOLERANCE:
		raise DomainError(f"{name} must be a unit vector, got {vector}")
	return vector


def direction_from_degrees(degrees : float) -> typing.Tuple[float, float]:
	"""Unit vector at the given angle from the horizontal axis"""
	radians = np.deg2rad(degrees)
	return (float(np.cos(radians)), float(np.sin(radians)))


def direction_degrees(direction : typing.Sequence[float]) -> float:
	"""Angle of a direction in degrees"""
	return float(np.rad2deg(np.arctan2(direction[1], direction[0])))


@dataclass(frozen=True)
class IncomingWave():
	"""Incoming wave vector k·ω with k > 0 and ‖ω‖ = 1"""
	k : float
	omega : typing.Tuple[float, float]

	def __post_init__(self):
		if not self.k > 0:
			raise DomainError(f"Incoming wavenumber must be positive, got k={self.k}")
		object.__setattr__(self, "k", float(self.k))
		object.__setattr__(self, "omega", _unit_vector(self.omega, "omega"))

	@classmethod
	def from_degrees(cls, k : float, omega_deg : float) -> 'IncomingWave':
		"""Incoming wave from its direction angle"""
		return cls(k=k, omega=direction_from_degrees(omega_deg))

	@property
	def k1(self) -> float:
		"""k·ω1"""
		return self.k * self.omega[0]

	@property
	def k2(self) -> float:
		"""k·ω2"""
		return self.k * self.omega[1]

	@property
	def wavenumber(self) -> Wavenumber:
		"""k + i0"""
		return Wavenumber.real(self.k)


@dataclass(frozen=True)
class AmplitudeRecord():
	"""One value of the scattering amplitude f(k, ω, ω')"""
	k : float
	omega : typing.Tuple[float, float]
	omega_prime : typing.Tuple[float, float]
	f : complex
	method : AmplitudeMethod = AmplitudeMethod.FULL

	def __post_init__(self):
		if not np.isfinite(self.f):
			raise DomainError(f"Amplitude must be finite, got {self.f}")

	@property
	def omega_deg(self) -> float:
		"""Incoming angle in degrees"""
		return direction_degrees(self.omega)

	@property
	def omega_prime_deg(self) -> float:
		"""Outgoing angle in degrees"""
		return direction_degrees(self.omega_prime)

	def to_row(self) -> typing.Dict[str, typing.Any]:
		"""Output row with the amplitude split into real and imaginary part"""
		return {
			"k": self.k,
			"omega_deg": self.omega_deg,
			"omega_prime_deg": self.omega_prime_deg,
			"re_f": self.f.real,
			"im_f": self.f.imag,
			"abs2_f": abs(self.f) ** 2,
			"method": self.method.value
		}


def sym_plane_wave(wave : IncomingWave, x : PointLike) -> typing.Union[complex, np.ndarray]:
	"""S(x) = Σ over the four sign choices of e^{i(±k1·x1 ± k2·x2)} = 4cos(k1·x1)cos(k2·x2)"""
	pts = as_points(x)
	result = 4.0 * np.cos(wave.k1 * pts[..., 0]) * np.cos(wave.k2 * pts[..., 1]) + 0j
	if np.ndim(result) == 0:
		return complex(result)
	return result


def boundary_rhs(wave : IncomingWave, pot : BoundaryPotential, grid : BoundaryGrid) -> np.ndarray:
	"""√|σ(y)|·S(y) at the grid nodes, i.e. √|σ|·4cos(k_j·y) with j the axis of the node"""
	coordinates = grid.coordinates
	component = np.where(grid.axes == 0, wave.k1, wave.k2)
	return pot.sqrt_abs(coordinates) * 4.0 * np.cos(component * coordinates) + 0j


def scattered_density(wave : IncomingWave, pot : BoundaryPotential, grid : BoundaryGrid,
		matrix : KernelMatrix | None = None
	) -> np.ndarray:
	"""ρ = sgn(σ)√|σ|·(1 + B(k+i0))^{-1}(√|σ|·S) at the grid nodes.

	Raises:
		NearSingularError: k is (numerically) a point of the exceptional set
	"""
	if pot.sup_abs() == 0:
		return np.zeros(grid.nodes_total, dtype=complex)
	if matrix is None:
		matrix = assemble(wave.wavenumber, grid, pot)
	return pot.signed_sqrt(grid.coordinates) * matrix.solve(boundary_rhs(wave, pot, grid))


def generalized_eigenfunction(wave : IncomingWave, pot : BoundaryPotential, grid : BoundaryGrid, x : PointLike,
		matrix : KernelMatrix | None = None
	) -> typing.Union[complex, np.ndarray]:
	"""ψ⁺(x) for the incoming wave, at one point or an array of points of the closed quarter plane"""
	incoming = sym_plane_wave(wave, x)
	if pot.sup_abs() == 0:
		return incoming
	density = scattered_density(wave, pot, grid, matrix)
	return incoming + layer_potential(wave.wavenumber, grid, density, x)


def _check_outgoing(omega_prime : typing.Sequence[float]) -> typing.Tuple[float, float]:
	direction = _unit_vector(omega_prime, "omega_prime")
	if min(abs(direction[0]), abs(direction[1])) < _UNIT_TOLERANCE:
		raise DomainError(f"The amplitude is only defined for outgoing directions off the axes, got omega'={direction}")
	return direction


def _cosine_transforms(density : np.ndarray, grid : BoundaryGrid, xi : typing.Tuple[float, float]
		) -> typing.Tuple[complex, complex]:
	"""T_j(ξ_j) = (1/√2π)∫ρ_j(y)cos(ξ_j·y)dy on each half-line"""
	y, w = grid.axis_nodes, grid.axis_weights
	n = grid.nodes_per_axis
	first = np.sum(density[:n] * np.cos(xi[0] * y) * w)
	second = np.sum(density[n:] * np.cos(xi[1] * y) * w)
	return first / np.sqrt(2.0 * np.pi), second / np.sqrt(2.0 * np.pi)


def scattering_amplitude(wave : IncomingWave,
		omega_prime : typing.Sequence[float],
		pot : BoundaryPotential,
		grid : BoundaryGrid,
		matrix : KernelMatrix | None = None,
		normalization : Normalization | str = Normalization.FAR_FIELD
	) -> AmplitudeRecord:
	"""f(k, ω, ω') = 2√(i/k)·[T1(k'1) + T2(k'2)] with T_j the cosine transform of the scattered density on axis j.

	Args:
		wave (IncomingWave): incoming wave
		omega_prime (typing.Sequence[float]): outgoing unit direction, both components nonzero
		pot (BoundaryPotential): the potential
		grid (BoundaryGrid): Nyström grid for pot
		matrix (KernelMatrix | None, optional): an already assembled 1 + B(k+i0) to reuse. Defaults to None.
		normalization (Normalization | str, optional): prefactor convention. Defaults to "far_field".

	Raises:
		DomainError: omega_prime along an axis
		NearSingularError: k is (numerically) a point of the exceptional set
	"""
	direction = _check_outgoing(omega_prime)
	normalization = Normalization(normalization)
	if pot.sup_abs() == 0:
		return AmplitudeRecord(wave.k, wave.omega, direction, 0j)
	density = scattered_density(wave, pot, grid, matrix)
	first, second = _cosine_transforms(density, grid, (wave.k * direction[0], wave.k * direction[1]))
	prefactor = 2.0 if normalization is Normalization.FAR_FIELD else -2.0
	f = prefactor * np.sqrt(1j / wave.k) * (first + second)
	return AmplitudeRecord(wave.k, wave.omega, direction, complex(f))


def far_field_amplitude(wave : IncomingWave,
		omega_prime : typing.Sequence[float],
		pot : BoundaryPotential,
		grid : BoundaryGrid,
		radius : float | None = None,
		matrix : KernelMatrix | None = None
	) -> complex:
	"""Finite-radius estimate √r·e^{-ikr}(ψ⁺ - S)(r·ω') of the amplitude (radius defaults to 40/k).

	Raises:
		DomainError: ω' points out of the quarter plane
	"""
	direction = _unit_vector(omega_prime, "omega_prime")
	if min(direction) < 0:
		raise DomainError(f"Far-field direction must point into the quarter plane, got {direction}")
	radius = DEFAULT_FAR_FIELD_RADIUS / wave.k if radius is None else float(radius)
	if pot.sup_abs() == 0:
		return 0j
	density = scattered_density(wave, pot, grid, matrix)
	point = radius * np.asarray(direction)
	scattered = layer_potential(wave.wavenumber, grid, density, point)
	return complex(np.sqrt(radius) * np.exp(-1j * wave.k * radius) * scattered)


def sigma_hat(k : float, xi : typing.Union[float, np.ndarray], pot : BoundaryPotential,
		closed_form : bool = False
	) -> typing.Union[complex, np.ndarray]:
	"""σ̂_k(ξ) = -4√(i/k)·(1/√2π)∫₀^∞ σ(y)cos(ξy)dy for the profile σ (without the coupling α).

	With closed_form=True (step potentials only) the integral is evaluated exactly,
	σ̂_k(ξ) = -(4σ0/ξ)√(i/(2πk))·sin(ξL), continued by -4σ0·L·√(i/(2πk)) at ξ = 0.

	Raises:
		DomainError: k <= 0, or closed_form for a non-step potential
	"""
	if not k > 0:
		raise DomainError(f"sigma_hat needs k > 0, got {k}")
	xi_arr = np.asarray(xi, dtype=float)
	profile = pot.with_alpha(1.0)
	if closed_form:
		if pot.shape != "step":
			raise DomainError(f"The closed form of sigma_hat is only known for step potentials, got {pot.shape}")
		length = float(pot.L) #type: ignore
		result = -4.0 * pot.sigma0 * length * np.sinc(xi_arr * length / np.pi) * np.sqrt(1j / (2.0 * np.pi * k))
	else:
		sup = profile.sup_abs()
		support = profile.support_radius(_SUPPORT_THRESHOLD * sup) if sup > 0 else 0.0
		if support <= 0:
			result = np.zeros_like(xi_arr, dtype=complex)
		else:
			transform = boundary_fourier_transform(profile.eval, xi_arr, support, profile.breakpoints())
			result = -4.0 * np.sqrt(1j / k) * transform
	if np.ndim(xi) == 0:
		return complex(result)
	return result


def weak_coupling_amplitude(wave : IncomingWave,
		omega_prime : typing.Sequence[float],
		pot : BoundaryPotential,
		alpha : float | None = None,
		normalization : Normalization | str = Normalization.FAR_FIELD
	) -> AmplitudeRecord:
	"""First-order (Born) amplitude in the coupling α (defaults to pot.alpha).

	The quoted four-term sum α·Σ_j[σ̂(k'_j + k_j) + σ̂(k'_j - k_j) + σ̂(k_j - k'_j) + σ̂(-k_j - k'_j)] is returned
	for normalization="displayed"; the far-field convention returns -1/2 of it, which is the first-order term of
	scattering_amplitude.
	"""
	direction = _unit_vector(omega_prime, "omega_prime")
	normalization = Normalization(normalization)
	alpha = pot.alpha if alpha is None else float(alpha)
	if alpha == 0 or pot.with_alpha(1.0).sup_abs() == 0:
		return AmplitudeRecord(wave.k, wave.omega, direction, 0j, AmplitudeMethod.WEAK_COUPLING)
	outgoing = (wave.k * direction[0], wave.k * direction[1])
	incoming = (wave.k1, wave.k2)
	arguments = []
	for j in (0, 1):
		arguments += [outgoing[j] + incoming[j], outgoing[j] - incoming[j], incoming[j] - outgoing[j],
			-incoming[j] - outgoing[j]]
	displayed = alpha * complex(np.sum(sigma_hat(wave.k, np.array(arguments), pot)))
	f = displayed if normalization is Normalization.DISPLAYED else -0.5 * displayed
	return AmplitudeRecord(wave.k, wave.omega, direction, f, AmplitudeMethod.WEAK_COUPLING)


def low_energy_constant(pot : BoundaryPotential, k : float = 1e-6,
		normalization : Normalization | str = Normalization.FAR_FIELD
	) -> float:
	"""k·|f_weak|²/(α·σ0·L)² for a step potential at small k (direction independent in the limit).

	The far-field convention gives 128/π, the displayed one 512/π.
	"""
	if pot.shape != "step":
		raise DomainError(f"The low-energy constant is defined for step potentials, got {pot.shape}")
	diagonal = direction_from_degrees(45.0)
	record = weak_coupling_amplitude(IncomingWave(k, diagonal), diagonal, pot, alpha=1.0,
		normalization=normalization)
	constant = k * abs(record.f) ** 2 / (pot.sigma0 * pot.L) ** 2 #type: ignore
	log.info(f"Low-energy constant k|f|^2/(alpha sigma0 L)^2 = {constant:.10g} (reference 128/pi = "
		f"{LOW_ENERGY_REFERENCE:.10g})")
	return float(constant)


def amplitude_sweep(pot : BoundaryPotential,
		ks : typing.Sequence[float],
		omegas_deg : typing.Sequence[float],
		omega_primes_deg : typing.Sequence[float],
		grid : BoundaryGrid | None = None,
		method : AmplitudeMethod | str = AmplitudeMethod.FULL,
		normalization : Normalization | str = Normalization.FAR_FIELD,
		mapper : typing.Callable[[typing.Callable, typing.Iterable], typing.Iterable] = map,
		**grid_options
	) -> typing.List[AmplitudeRecord]:
	"""Amplitudes on the product grid ks × omegas × omega_primes, ordered k-major.

	Each k is one task for the mapper; the Nyström matrix is assembled once per k and reused for all directions.
	"""
	method = AmplitudeMethod(method)
	if method is AmplitudeMethod.FULL and grid is None:
		grid = build_grid(pot, **grid_options)

	def records_for(k : float) -> typing.List[AmplitudeRecord]:
		matrix = None
		if method is AmplitudeMethod.FULL and pot.sup_abs() > 0:
			matrix = assemble(Wavenumber.real(k), grid, pot) #type: ignore
		records = []
		for omega_deg in omegas_deg:
			wave = IncomingWave.from_degrees(k, omega_deg)
			for omega_prime_deg in omega_primes_deg:
				direction = direction_from_degrees(omega_prime_deg)
				if method is AmplitudeMethod.FULL:
					records.append(scattering_amplitude(wave, direction, pot, grid, matrix, #type: ignore
						normalization))
				else:
					records.append(weak_coupling_amplitude(wave, direction, pot, normalization=normalization))
		log.debug(f"Amplitudes done for k={k:g}")
		return records

	per_k = list(mapper(records_for, [float(k) for k in ks]))
	return [record for records in per_k for record in records]
