"""
Spectral information of the Robin Laplacian: bound states on the negative axis, a scan of the positive axis for
points where 1 + B(k+i0) is not invertible, and the free spectral projection E₀(I) of the Neumann Laplacian.

Bound states are the values k = iκ where 1 + B(iκ) has a kernel. They are bracketed by the number of negative
eigenvalues of 1 + B(iκ) (which drops by one each time κ passes a binding wavenumber) and refined by bisection
on that count.
"""

import logging
import typing
import warnings
from dataclasses import dataclass, field

import numpy as np

from quarterwave.core import specfun
from quarterwave.core.exceptions import DomainError, QuarterwaveWarning
from quarterwave.core.kernels import PointLike, Wavenumber, as_points, image_offsets
from quarterwave.core.nystrom import BoundaryGrid, assemble, build_grid, layer_potential
from quarterwave.core.potential import BoundaryPotential

log = logging.getLogger(__name__)

DEFAULT_ROOT_TOLERANCE = 1e-8
DEFAULT_FLAG_RATIO = 1e-6
POLISH_FACTOR = 1e-4
INV_4PI = 1.0 / (4.0 * np.pi)

Mapper = typing.Callable[[typing.Callable, typing.Iterable], typing.Iterable]


@dataclass(frozen=True)
class BoundState():
	"""A negative eigenvalue -κ² of the Robin Laplacian"""
	kappa : float
	smin_at_root : float
	history : typing.Tuple[typing.Tuple[float, int], ...] = field(default=(), repr=False) #(κ, count) per bisection step

	def __post_init__(self):
		if self.kappa <= 0:
			raise DomainError(f"A bound state needs kappa > 0, got {self.kappa}")

	@property
	def energy(self) -> float:
		"""The eigenvalue -κ²"""
		return -self.kappa ** 2

	@property
	def wavenumber(self) -> Wavenumber:
		"""k = iκ"""
		return Wavenumber.imaginary(self.kappa)

	def to_row(self) -> typing.Dict[str, float]:
		"""Output row (kappa, energy, smin)"""
		return {"kappa": self.kappa, "energy": self.energy, "smin": self.smin_at_root}


@dataclass(frozen=True)
class AxisScan():
	"""smin(1 + B(k+i0)) sampled on the positive axis, plus the intervals where it drops below the flag threshold"""
	k : np.ndarray
	smin : np.ndarray
	flag_threshold : float
	flagged : typing.Tuple[typing.Tuple[float, float], ...] = ()

	@property
	def is_clear(self) -> bool:
		"""True when no sample was flagged"""
		return len(self.flagged) == 0

	def to_rows(self) -> typing.List[typing.Dict[str, typing.Any]]:
		"""One output row per sample"""
		flagged = self.smin < self.flag_threshold
		return [{"k": float(k), "smin": float(s), "flagged": bool(f)} for k, s, f in zip(self.k, self.smin, flagged)]


def _resolve_grid(pot : BoundaryPotential, grid : BoundaryGrid | None, grid_options : typing.Dict[str, typing.Any]
		) -> BoundaryGrid:
	if grid is not None:
		return grid
	return build_grid(pot, **grid_options)


def negative_count(kappa : float, pot : BoundaryPotential, grid : BoundaryGrid) -> int:
	"""Number of bound states with binding wavenumber above kappa (negative eigenvalues of 1 + B(iκ))"""
	return assemble(Wavenumber.imaginary(kappa), grid, pot).negative_eigenvalue_count()


Bracket = typing.Tuple[float, float, int, int] #lower, upper, count at lower, count at upper


def _narrowest_width(upper : float) -> float:
	"""Smallest bracket width worth bisecting at the scale of upper"""
	return 8.0 * np.finfo(float).eps * abs(upper)


def _refine(pot : BoundaryPotential, grid : BoundaryGrid, bracket : Bracket, tolerance : float,
		history : typing.List[typing.Tuple[float, int]]
	) -> typing.List[Bracket]:
	"""Bisect the bracket until every drop of the count is located within a bracket of width `tolerance`"""
	lower, upper, count_lower, count_upper = bracket
	drops = count_lower - count_upper
	if drops <= 0:
		return []
	while upper - lower > max(tolerance, _narrowest_width(upper)):
		middle = 0.5 * (lower + upper)
		count_middle = negative_count(middle, pot, grid)
		history.append((middle, count_middle))
		if count_middle == count_lower:
			lower = middle
		elif count_middle == count_upper:
			upper = middle
		else: #Several roots inside, split the bracket
			return _refine(pot, grid, (lower, middle, count_lower, count_middle), tolerance, history) \
				+ _refine(pot, grid, (middle, upper, count_middle, count_upper), tolerance, history)
	return [(lower, upper, count_lower, count_upper)] * drops


def _polish(pot : BoundaryPotential, grid : BoundaryGrid, bracket : Bracket, tolerance : float,
		history : typing.List[typing.Tuple[float, int]]
	) -> typing.Tuple[float, float]:
	"""Midpoint of the bracket and smin there. The bracket keeps being bisected while smin exceeds the tolerance,
	down to POLISH_FACTOR * tolerance (or the float resolution)."""
	lower, upper, count_lower, _count_upper = bracket
	while True:
		root = 0.5 * (lower + upper)
		matrix = assemble(Wavenumber.imaginary(root), grid, pot)
		smin = matrix.min_singular_value()
		if smin <= tolerance or upper - lower <= max(POLISH_FACTOR * tolerance, _narrowest_width(upper)):
			return root, smin
		count_root = matrix.negative_eigenvalue_count()
		history.append((root, count_root))
		if count_root == count_lower:
			lower = root
		else:
			upper = root


def find_bound_states(pot : BoundaryPotential,
		kappa_min : float,
		kappa_max : float,
		samples : int = 64,
		grid : BoundaryGrid | None = None,
		root_tolerance : float = DEFAULT_ROOT_TOLERANCE,
		mapper : Mapper = map,
		**grid_options
	) -> typing.List[BoundState]:
	"""Locate all bound states -κ² with κ in [kappa_min, kappa_max].

	Args:
		pot (BoundaryPotential): the boundary potential
		kappa_min (float): lower end of the κ range, > 0
		kappa_max (float): upper end of the κ range
		samples (int, optional): size of the initial κ grid. Defaults to 64.
		grid (BoundaryGrid | None, optional): Nyström grid, built from grid_options when None.
		root_tolerance (float, optional): bracket width at which bisection stops, and the largest smin accepted at a
			root (a root with larger smin is bisected further, then reported with a warning). Defaults to 1e-8.
		mapper (Mapper, optional): map-like callable used for the initial scan (e.g. a thread pool's map).
			Defaults to the builtin map.

	Raises:
		DomainError: the κ range is not a subset of (0, ∞)

	Returns:
		typing.List[BoundState]: bound states ordered by decreasing energy (increasing κ)
	"""
	if not 0 < kappa_min < kappa_max:
		raise DomainError(f"kappa range must satisfy 0 < kappa_min < kappa_max, got [{kappa_min}, {kappa_max}]")
	if samples < 2:
		raise DomainError(f"At least 2 kappa samples are needed, got {samples}")
	if pot.sup_abs() == 0:
		log.info("Potential vanishes, the free Neumann Laplacian has no bound states")
		return []
	if pot.changes_sign():
		message = "The potential takes both signs: the eigenvalues of 1 + B(i kappa) need not move monotonically " \
			"with kappa, so counting may miss or misplace bound states"
		log.warning(message)
		warnings.warn(message, QuarterwaveWarning)
	grid = _resolve_grid(pot, grid, grid_options)

	kappas = np.linspace(kappa_min, kappa_max, samples)
	counts = np.array(list(mapper(lambda kappa: negative_count(float(kappa), pot, grid), kappas)), dtype=int)
	log.debug(f"Negative-eigenvalue counts on the kappa grid: {counts.tolist()}")
	if np.any(np.diff(counts) > 0):
		message = "Negative-eigenvalue count increases with kappa somewhere on the scan grid, the boundary grid " \
			"is probably too coarse for this potential"
		log.warning(message)
		warnings.warn(message, QuarterwaveWarning)
	if counts[-1] > 0:
		log.info(f"{counts[-1]} bound state(s) have kappa > {kappa_max} and are outside the requested range")

	states = []
	for i in np.nonzero(np.diff(counts) < 0)[0]:
		history : typing.List[typing.Tuple[float, int]] = []
		brackets = _refine(pot, grid, (float(kappas[i]), float(kappas[i + 1]), int(counts[i]), int(counts[i + 1])),
			root_tolerance, history)
		for bracket in brackets:
			root, smin = _polish(pot, grid, bracket, root_tolerance, history)
			log.info(f"Bound state at kappa={root:.10f} (energy {-root ** 2:.10f}), smin={smin:.3e}")
			if smin > root_tolerance:
				message = f"smin={smin:.3e} at the bound state kappa={root:.10f} exceeds the root tolerance " \
					f"{root_tolerance:.1e}, the root may be spurious or the boundary grid too coarse"
				log.warning(message)
				warnings.warn(message, QuarterwaveWarning)
			states.append(BoundState(kappa=root, smin_at_root=smin, history=tuple(history)))
	return sorted(states, key=lambda state: state.kappa)


def scan_positive_axis(pot : BoundaryPotential,
		k_min : float,
		k_max : float,
		samples : int = 200,
		grid : BoundaryGrid | None = None,
		flag_ratio : float = DEFAULT_FLAG_RATIO,
		mapper : Mapper = map,
		**grid_options
	) -> AxisScan:
	"""Sample smin(1 + B(k+i0)) on [k_min, k_max] and flag samples below flag_ratio·median(smin).

	Flagged runs of consecutive samples are reported as (k_first, k_last) intervals. They mark candidate points of
	the exceptional set (embedded eigenvalues); the scan makes no claim beyond that.
	"""
	if not 0 < k_min < k_max:
		raise DomainError(f"k range must satisfy 0 < k_min < k_max, got [{k_min}, {k_max}]")
	ks = np.linspace(k_min, k_max, samples)
	if pot.sup_abs() == 0:
		return AxisScan(k=ks, smin=np.ones(samples), flag_threshold=flag_ratio)
	grid = _resolve_grid(pot, grid, grid_options)

	smin = np.array(list(mapper(lambda k: assemble(Wavenumber.real(float(k)), grid, pot).min_singular_value(), ks)))
	threshold = flag_ratio * float(np.median(smin))
	below = smin < threshold
	flagged = []
	start = None
	for i, is_below in enumerate(below):
		if is_below and start is None:
			start = i
		if start is not None and (not is_below or i == len(below) - 1):
			end = i if is_below else i - 1
			flagged.append((float(ks[start]), float(ks[end])))
			start = None
	if flagged:
		log.warning(f"Positive-axis scan flagged {len(flagged)} interval(s): {flagged}")
	return AxisScan(k=ks, smin=smin, flag_threshold=threshold, flagged=tuple(flagged))


def _check_interval(interval : typing.Sequence[float]) -> typing.Tuple[float, float]:
	lower, upper = float(interval[0]), float(interval[1])
	if lower < 0 or upper < lower:
		raise DomainError(f"Energy interval must satisfy 0 <= lambda1 <= lambda2, got [{lower}, {upper}]")
	return lower, upper


def _image_distances(x : PointLike, y : PointLike) -> np.ndarray:
	return np.linalg.norm(image_offsets(as_points(x), as_points(y)), axis=-1)


def free_projection_kernel(interval : typing.Sequence[float], x : PointLike, y : PointLike, order : int = 24
		) -> typing.Union[float, np.ndarray]:
	"""Integral kernel of the spectral projection E₀(I) of the Neumann Laplacian on the quarter plane,

		E₀(I)(x, y) = (1/4π) Σ_images ∫_I J0(√λ·d) dλ = (1/4π) Σ_images ∫ 2ρ J0(ρd) dρ   (ρ = √λ),

	integrated by composite Gauss-Legendre quadrature in ρ with panels resolving the J0 oscillation.

	Args:
		interval (typing.Sequence[float]): energy interval [λ1, λ2] with 0 <= λ1 <= λ2
		x (PointLike): first point(s)
		y (PointLike): second point(s), broadcast against x
		order (int, optional): Gauss-Legendre order per panel. Defaults to 24.
	"""
	lower, upper = _check_interval(interval)
	distances = _image_distances(x, y)
	rho_lower, rho_upper = np.sqrt(lower), np.sqrt(upper)
	if rho_upper == rho_lower:
		result = np.zeros(distances.shape[1:])
	else:
		panels = int(np.ceil((rho_upper - rho_lower) * max(float(np.max(distances)), 1.0) / np.pi)) + 1
		ref_nodes, ref_weights = np.polynomial.legendre.leggauss(order)
		edges = np.linspace(rho_lower, rho_upper, panels + 1)
		half = 0.5 * np.diff(edges)
		rho = (0.5 * (edges[:-1] + edges[1:])[:, None] + half[:, None] * ref_nodes[None, :]).ravel()
		weights = (half[:, None] * ref_weights[None, :]).ravel()
		integrand = 2.0 * rho * specfun.bessel_J0(np.multiply.outer(distances, rho))
		result = INV_4PI * (integrand @ weights).sum(axis=0)
	if np.ndim(result) == 0:
		return float(result)
	return result


def free_projection_kernel_closed_form(interval : typing.Sequence[float], x : PointLike, y : PointLike
		) -> typing.Union[float, np.ndarray]:
	"""Closed form of free_projection_kernel via ∫2ρJ0(ρd)dρ = 2ρJ1(ρd)/d (limit ρ² at d = 0)"""
	lower, upper = _check_interval(interval)
	distances = _image_distances(x, y)

	def antiderivative(rho : float) -> np.ndarray:
		safe = np.where(distances > 0, distances, 1.0)
		return np.where(distances > 0, 2.0 * rho * specfun.bessel_J1(rho * safe) / safe, rho * rho)

	result = INV_4PI * (antiderivative(np.sqrt(upper)) - antiderivative(np.sqrt(lower))).sum(axis=0)
	if np.ndim(result) == 0:
		return float(result)
	return result


def lattice_projection_kernel(interval : typing.Sequence[float], x : PointLike, y : PointLike,
		period : float = 2000.0
	) -> float:
	"""Discrete-Fourier oracle for E₀(I)(x, y).

	The image-symmetrized kernel is projected on the periodic box [-P/2, P/2)² by keeping the lattice modes
	p = 2πm/P with |p|² in I: (1/P²) Σ_modes Σ_images cos(p·d).
	"""
	lower, upper = _check_interval(interval)
	offsets = image_offsets(as_points(x), as_points(y))
	if offsets.ndim != 2:
		raise DomainError("lattice_projection_kernel takes single points x and y")
	step = 2.0 * np.pi / period
	reach = int(np.floor(np.sqrt(upper) / step))
	modes = np.arange(-reach, reach + 1) * step
	p1, p2 = np.meshgrid(modes, modes, indexing="ij")
	norm_sq = (p1 * p1 + p2 * p2).ravel()
	keep = (norm_sq >= lower) & (norm_sq <= upper)
	p1, p2 = p1.ravel()[keep], p2.ravel()[keep]
	total = 0.0
	for offset in offsets:
		total += float(np.cos(p1 * offset[0] + p2 * offset[1]).sum())
	return total / period ** 2


def projection_idempotence_defect(interval : typing.Sequence[float],
		box : float = 40.0,
		spacing : float = 0.8,
		inner : float = 10.0
	) -> float:
	"""Relative defect ‖PWP - P‖/‖P‖ of the sampled projection kernel, restricted to the inner window [0, inner]².

	P is E₀(I) sampled on a uniform grid of [0, box]², W holds the trapezoid weights of that grid; the products
	only involve rows and columns inside the window, so the truncation of the box is the main error source.
	"""
	if not 0 < inner <= box:
		raise DomainError(f"Inner window must satisfy 0 < inner <= box, got inner={inner}, box={box}")
	count = int(round(box / spacing)) + 1
	axis = np.linspace(0.0, box, count)
	axis_weights = np.full(count, box / (count - 1))
	axis_weights[[0, -1]] *= 0.5
	x1, x2 = np.meshgrid(axis, axis, indexing="ij")
	points = np.stack([x1.ravel(), x2.ravel()], axis=-1)
	weights = np.outer(axis_weights, axis_weights).ravel()
	window = np.nonzero((points[:, 0] <= inner + 1e-12) & (points[:, 1] <= inner + 1e-12))[0]

	rows = np.asarray(free_projection_kernel_closed_form(interval, points[window][:, None, :], points[None, :, :]))
	squared = (rows * weights[None, :]) @ rows.T
	target = rows[:, window]
	defect = float(np.linalg.norm(squared - target) / np.linalg.norm(target))
	log.debug(f"Projection idempotence defect on [0,{inner}]^2 (box {box}, spacing {spacing}): {defect:.3e}")
	return defect


def bound_state_eigenfunction(state : BoundState,
		pot : BoundaryPotential,
		grid : BoundaryGrid,
		points : PointLike,
		normalization_box : float | None = None,
		normalization_order : int = 40
	) -> typing.Union[complex, np.ndarray]:
	"""Eigenfunction of the bound state, ψ = single layer of sgn(σ)√|σ|·φ with φ spanning the kernel of 1 + B(iκ).

	ψ is scaled to unit L² mass on [0, box]² (box defaults to 20/κ, measured by tensor Gauss-Legendre quadrature)
	and its phase is fixed so that it is real and positive at the corner.
	"""
	wave = state.wavenumber
	null = assemble(wave, grid, pot).null_vector()
	density = pot.signed_sqrt(grid.coordinates) * null

	box = normalization_box if normalization_box is not None else 20.0 / state.kappa
	nodes, weights = np.polynomial.legendre.leggauss(normalization_order)
	nodes, weights = 0.5 * box * (nodes + 1.0), 0.5 * box * weights
	n1, n2 = np.meshgrid(nodes, nodes, indexing="ij")
	samples = layer_potential(wave, grid, density, np.stack([n1.ravel(), n2.ravel()], axis=-1))
	mass = float(np.sqrt(np.sum(np.abs(samples) ** 2 * np.outer(weights, weights).ravel())))
	corner = layer_potential(wave, grid, density, np.array([0.0, 0.0]))
	phase = corner / abs(corner) if abs(corner) > 0 else 1.0
	return layer_potential(wave, grid, density, points) / (mass * phase)
