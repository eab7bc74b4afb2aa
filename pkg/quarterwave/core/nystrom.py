"""
Nyström discretization of the boundary operator 1 + B(k) on the two half-lines of the quarter-plane boundary.

Each half-line is cut into panels (geometrically graded toward the corner, uniform elsewhere) carrying
Gauss-Legendre nodes. Both axes carry the same nodes, so the boundary single-layer matrix has the block form

	S = [[S_same, S_cross],
	     [S_cross, S_same]],     B = -diag(√|σ|) · S · diag(sgn(σ)√|σ|).

Near-singular entries are never evaluated naively:
	- same-axis, log singularity at the target: K0 is split into I0·ln d + smooth and ln d is integrated
	  against the panel's Legendre polynomials in closed form (Legendre functions of the second kind)
	- images close to the corner and cross-axis entries near the corner: composite Gauss rules graded toward
	  the nearest point of the panel
"""

import logging
import threading
import typing
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from quarterwave.core import specfun
from quarterwave.core.exceptions import DomainError, NearSingularError, NumericalError
from quarterwave.core.kernels import (Wavenumber, WavenumberLike, as_points, as_wavenumber, green_free,
                                      green_images)
from quarterwave.core.potential import BoundaryPotential

log = logging.getLogger(__name__)

NEAR_LIMIT = 2.0 #Source panel is "near" a singularity whose local coordinate |u| <= NEAR_LIMIT
GRADED_ORDER = 16
DEFAULT_CONDITION_LIMIT = 1e12
DEFAULT_RESIDUAL_TOLERANCE = 1e-10
DEFAULT_RELATIVE_TRUNCATION = 1e-10 #Truncation threshold relative to sup|σ| when none is given
_MILLER_CAP = 20000

_solver_limits = {"condition_limit": DEFAULT_CONDITION_LIMIT, "residual_tolerance": DEFAULT_RESIDUAL_TOLERANCE}


def set_solver_limits(condition_limit : float | None = None, residual_tolerance : float | None = None):
	"""Change the limits used by KernelMatrix.solve when none are passed explicitly (None keeps the current value)"""
	if condition_limit is not None:
		_solver_limits["condition_limit"] = float(condition_limit)
	if residual_tolerance is not None:
		_solver_limits["residual_tolerance"] = float(residual_tolerance)
	log.debug(f"Solver limits set to {_solver_limits}")


def get_solver_limits() -> typing.Dict[str, float]:
	"""The limits currently used by KernelMatrix.solve"""
	return dict(_solver_limits)


@dataclass
class BoundaryGrid():
	"""
	Panels and Gauss-Legendre nodes on one half-line, used identically on the horizontal and vertical axis.
	Global node order: all horizontal nodes (increasing), then all vertical nodes (increasing).
	"""
	edges : np.ndarray
	nodes_per_panel : int
	X_max : float #pylint: disable=invalid-name
	grading_levels : int
	grading_ratio : float = 2.0

	reference_nodes : np.ndarray = field(init=False, repr=False)
	reference_weights : np.ndarray = field(init=False, repr=False)
	axis_nodes : np.ndarray = field(init=False, repr=False)
	axis_weights : np.ndarray = field(init=False, repr=False)
	node_panel : np.ndarray = field(init=False, repr=False)
	to_coefficients : np.ndarray = field(init=False, repr=False) #nodal values -> Legendre coefficients (p x p)

	def __post_init__(self):
		self.edges = np.asarray(self.edges, dtype=float)
		if len(self.edges) < 2 or np.any(np.diff(self.edges) <= 0) or self.edges[0] != 0:
			raise DomainError("Panel edges must start at 0 and be strictly increasing")
		p = self.nodes_per_panel
		self.reference_nodes, self.reference_weights = np.polynomial.legendre.leggauss(p)
		left, right = self.edges[:-1], self.edges[1:]
		half = 0.5 * (right - left)
		center = 0.5 * (right + left)
		self.axis_nodes = (center[:, None] + half[:, None] * self.reference_nodes[None, :]).ravel()
		self.axis_weights = (half[:, None] * self.reference_weights[None, :]).ravel()
		self.node_panel = np.repeat(np.arange(self.panel_count), p)
		degrees = np.arange(p)
		vander = np.polynomial.legendre.legvander(self.reference_nodes, p - 1) #(node, degree)
		self.to_coefficients = ((2 * degrees + 1) / 2.0)[:, None] * vander.T * self.reference_weights[None, :]

	@property
	def panel_count(self) -> int:
		"""Panels per axis"""
		return len(self.edges) - 1

	@property
	def nodes_per_axis(self) -> int:
		"""Nodes on one half-line"""
		return len(self.axis_nodes)

	@property
	def nodes_total(self) -> int:
		"""Nodes on both half-lines (the size of the Nyström system)"""
		return 2 * self.nodes_per_axis

	@property
	def coordinates(self) -> np.ndarray:
		"""Distance to the corner of every node (global order)"""
		return np.concatenate([self.axis_nodes, self.axis_nodes])

	@property
	def weights(self) -> np.ndarray:
		"""Quadrature weight of every node (global order)"""
		return np.concatenate([self.axis_weights, self.axis_weights])

	@property
	def axes(self) -> np.ndarray:
		"""0 for horizontal nodes, 1 for vertical nodes (global order)"""
		return np.repeat([0, 1], self.nodes_per_axis)

	@property
	def plane_points(self) -> np.ndarray:
		"""Nodes embedded in the plane, shape (nodes_total, 2)"""
		zeros = np.zeros(self.nodes_per_axis)
		return np.concatenate([
			np.stack([self.axis_nodes, zeros], axis=-1),
			np.stack([zeros, self.axis_nodes], axis=-1)
		])

	def panel(self, index : int) -> typing.Tuple[float, float]:
		"""(left, right) edge of a panel"""
		return float(self.edges[index]), float(self.edges[index + 1])

	def panel_slice(self, index : int, axis : int = 0) -> slice:
		"""Global node indices of a panel on the given axis"""
		start = axis * self.nodes_per_axis + index * self.nodes_per_panel
		return slice(start, start + self.nodes_per_panel)

	def interpolation_matrix(self, index : int, points : np.ndarray) -> np.ndarray:
		"""Matrix mapping the nodal values of a panel to values at arbitrary coordinates on that panel"""
		left, right = self.panel(index)
		local = (np.asarray(points, dtype=float) - 0.5 * (left + right)) / (0.5 * (right - left))
		return np.polynomial.legendre.legvander(local, self.nodes_per_panel - 1) @ self.to_coefficients


def build_grid(pot : BoundaryPotential,
		panels_per_axis : int = 8,
		nodes_per_panel : int = 16,
		truncation_threshold : float | None = None,
		grading_levels : int | None = None,
		grading_ratio : float = 2.0
	) -> BoundaryGrid:
	"""Build the boundary grid for a potential.

	The half-line is truncated at X_max = support_radius(pot, threshold) (X_max = 1 for a vanishing potential).
	It is cut into panels_per_axis - grading_levels uniform panels, after which the first uniform panel is replaced
	by grading_levels + 1 panels shrinking by grading_ratio toward the corner. Discontinuities of σ inside
	(0, X_max) become additional panel edges.

	Args:
		pot (BoundaryPotential): the potential
		panels_per_axis (int, optional): panel count per axis. Defaults to 8.
		nodes_per_panel (int, optional): Gauss-Legendre order per panel. Defaults to 16.
		truncation_threshold (float | None, optional): absolute threshold passed to support_radius. Defaults to
			None, meaning 1e-10·sup|σ|.
		grading_levels (int | None, optional): number of graded panels toward the corner. Defaults to
			panels_per_axis // 2.
		grading_ratio (float, optional): ratio of consecutive graded panels. Defaults to 2.
	"""
	if panels_per_axis < 1:
		raise DomainError(f"panels_per_axis must be >= 1, got {panels_per_axis}")
	if nodes_per_panel < 2:
		raise DomainError(f"nodes_per_panel must be >= 2, got {nodes_per_panel}")
	if grading_levels is None:
		grading_levels = panels_per_axis // 2
	if not 0 <= grading_levels < panels_per_axis:
		raise DomainError(f"grading_levels must be in [0, panels_per_axis), got {grading_levels}")
	if grading_ratio <= 1:
		raise DomainError(f"grading_ratio must be > 1, got {grading_ratio}")

	sup = pot.sup_abs()
	if truncation_threshold is None:
		truncation_threshold = DEFAULT_RELATIVE_TRUNCATION * sup if sup > 0 else 1.0
	x_max = pot.support_radius(truncation_threshold)
	if x_max <= 0:
		log.debug("Potential vanishes, using the degenerate grid on [0, 1]")
		x_max = 1.0

	uniform = np.linspace(0.0, x_max, panels_per_axis - grading_levels + 1)
	first = uniform[1]
	graded = [first / grading_ratio ** level for level in range(grading_levels, 0, -1)]
	edges = [0.0, *graded, *uniform[1:]]
	for point in pot.breakpoints():
		if 0 < point < x_max and np.min(np.abs(np.asarray(edges) - point)) > 1e-12 * x_max:
			edges.append(point)
	edges = np.array(sorted(edges))
	log.debug(f"Built boundary grid with {len(edges) - 1} panels of {nodes_per_panel} nodes on [0, {x_max:g}]")
	return BoundaryGrid(edges=edges, nodes_per_panel=nodes_per_panel, X_max=x_max, grading_levels=grading_levels,
		grading_ratio=grading_ratio)


def legendre_log_moments(u : np.ndarray, degree : int) -> np.ndarray:
	"""M[..., n] = ∫_{-1}^{1} ln|u - t| P_n(t) dt for n = 0..degree and real u with |u| != 1.

	Uses M_0 = (1+u)ln|1+u| + (1-u)ln|1-u| - 2 and, for n >= 1, M_n = 2(Q_{n+1}(u) - Q_{n-1}(u)) / (2n+1) with
	Q_n the Legendre functions of the second kind (forward recurrence on the cut, Miller's backward
	recurrence off the cut where Q_n is the minimal solution).
	"""
	u = np.atleast_1d(np.asarray(u, dtype=float))
	if np.any(np.abs(u) == 1.0):
		raise DomainError("Log moments are not defined for a target at a panel endpoint")
	q_values = np.empty(u.shape + (degree + 2,))
	inside = np.abs(u) < 1
	if np.any(inside):
		ui = u[inside]
		q_in = np.empty(ui.shape + (degree + 2,))
		q_in[..., 0] = 0.5 * np.log((1 + ui) / (1 - ui))
		if degree + 2 > 1:
			q_in[..., 1] = ui * q_in[..., 0] - 1.0
		for n in range(1, degree + 1):
			q_in[..., n + 1] = ((2 * n + 1) * ui * q_in[..., n] - n * q_in[..., n - 1]) / (n + 1)
		q_values[inside] = q_in
	if np.any(~inside):
		q_values[~inside] = _second_kind_outside(u[~inside], degree + 1)

	moments = np.empty(u.shape + (degree + 1,))
	with np.errstate(divide="ignore", invalid="ignore"):
		plus = np.where(u == -1, 0.0, (1 + u) * np.log(np.abs(1 + u)))
		minus = np.where(u == 1, 0.0, (1 - u) * np.log(np.abs(1 - u)))
	moments[..., 0] = plus + minus - 2.0
	for n in range(1, degree + 1):
		moments[..., n] = 2.0 * (q_values[..., n + 1] - q_values[..., n - 1]) / (2 * n + 1)
	return moments


def _second_kind_outside(u : np.ndarray, top : int) -> np.ndarray:
	"""Q_0..Q_top at |u| > 1 by Miller's algorithm normalized with the exact Q_0"""
	zeta_sq = (np.abs(u) + np.sqrt(u * u - 1.0)) ** 2
	start = int(min(_MILLER_CAP, top + 10 + np.ceil(40.0 / np.log(np.min(zeta_sq)))))
	result = np.empty(u.shape + (top + 1,))
	upper = np.zeros_like(u) #Q_{n+1}
	current = np.full_like(u, 1e-30) #Q_n
	for n in range(start, 0, -1):
		lower = ((2 * n + 1) * u * current - (n + 1) * upper) / n
		upper, current = current, lower
		if n - 1 <= top:
			result[..., n - 1] = current
		scale = np.abs(current) > 1e100
		if np.any(scale):
			upper[scale] /= 1e100
			current[scale] /= 1e100
			result[scale] /= 1e100
	exact_q0 = 0.5 * np.log(np.abs((u + 1) / (u - 1)))
	return result * (exact_q0 / result[..., 0])[..., None]


def graded_rule(left : float, right : float, focus : float, distance : float, order : int = GRADED_ORDER
		) -> typing.Tuple[np.ndarray, np.ndarray]:
	"""Composite Gauss-Legendre rule on [left, right] with pieces halving toward `focus`.

	Refinement stops once pieces are shorter than `distance` (the distance of the singularity to the focus),
	or at 1e-14 of the interval for a singularity on the interval.
	"""
	ref_x, ref_w = np.polynomial.legendre.leggauss(order)
	stop = max(distance, 1e-14 * (right - left))
	nodes, weights = [], []
	for side_end in (right, left):
		length = abs(side_end - focus)
		if length <= 0:
			continue
		direction = 1.0 if side_end > focus else -1.0
		outer = length
		while outer > stop:
			inner = outer / 2
			lo, hi = sorted((focus + direction * inner, focus + direction * outer))
			nodes.append(0.5 * (hi - lo) * ref_x + 0.5 * (hi + lo))
			weights.append(0.5 * (hi - lo) * ref_w)
			outer = inner
		lo, hi = sorted((focus, focus + direction * outer))
		nodes.append(0.5 * (hi - lo) * ref_x + 0.5 * (hi + lo))
		weights.append(0.5 * (hi - lo) * ref_w)
	return np.concatenate(nodes), np.concatenate(weights)


def _graded_panel_weights(kernel : typing.Callable[[np.ndarray], np.ndarray],
		grid : BoundaryGrid, index : int, focus : float, distance : float
	) -> np.ndarray:
	"""Weights w_j with Σ_j w_j φ(y_j) = ∫_panel kernel(y)φ(y)dy for φ polynomial on the panel"""
	left, right = grid.panel(index)
	nodes, weights = graded_rule(left, right, focus, distance)
	return (kernel(nodes) * weights) @ grid.interpolation_matrix(index, nodes)


def single_layer_blocks(k : WavenumberLike, grid : BoundaryGrid) -> typing.Tuple[np.ndarray, np.ndarray]:
	"""Quadrature matrices of φ ↦ ∫ 𝔊⁽⁰⁾(k)(x, y)φ(y)dy restricted to one axis pair.

	Returns:
		typing.Tuple[np.ndarray, np.ndarray]: (same-axis block, cross-axis block), both (n, n) with weights folded in
	"""
	wave = as_wavenumber(k)
	s, w = grid.axis_nodes, grid.axis_weights
	p = grid.nodes_per_panel
	diff = np.abs(s[:, None] - s[None, :])
	np.fill_diagonal(diff, 1.0) #Diagonal is overwritten by the self-panel correction below
	direct = 2.0 * green_free(wave, diff) * w[None, :]
	image = 2.0 * green_free(wave, s[:, None] + s[None, :]) * w[None, :]
	cross = 4.0 * green_free(wave, np.hypot(s[:, None], s[None, :])) * w[None, :]

	log_k = np.log(-1j * wave.k)
	ref_w = grid.reference_weights
	for index in range(grid.panel_count):
		left, right = grid.panel(index)
		center, half = 0.5 * (left + right), 0.5 * (right - left)
		cols = slice(index * p, (index + 1) * p)
		near_reach = half * (NEAR_LIMIT - 1.0)

		#Same axis, direct term: log singularity at y = s
		local = (s - center) / half
		rows = np.nonzero(np.abs(local) <= NEAR_LIMIT)[0]
		if rows.size:
			dist = np.abs(s[rows, None] - s[None, cols])
			if np.max(np.abs(wave.k) * dist) <= specfun.SPLIT_RADIUS:
				log_coefficient, smooth = specfun.k0_log_split(-1j * wave.k * dist)
				regular = log_coefficient * log_k + smooth
				log_weights = half * (legendre_log_moments(local[rows], p - 1) @ grid.to_coefficients \
					+ np.log(half) * ref_w[None, :])
				direct[rows, cols] = (log_coefficient * log_weights + regular * half * ref_w[None, :]) / np.pi
			else:
				for row in rows:
					focus = float(np.clip(s[row], left, right))
					direct[row, cols] = _graded_panel_weights(
						lambda y, target=s[row]: 2.0 * green_free(wave, np.abs(target - y)),
						grid, index, focus, abs(s[row] - focus))

		#Same axis, mirrored term: singularity at y = -s, closest panel point is `left`
		for row in np.nonzero(left + s <= near_reach)[0]:
			image[row, cols] = _graded_panel_weights(
				lambda y, target=s[row]: 2.0 * green_free(wave, target + y),
				grid, index, left, left + s[row])

		#Cross axis: singularities at y = ±is
		for row in np.nonzero(np.hypot(left, s) <= near_reach)[0]:
			cross[row, cols] = _graded_panel_weights(
				lambda y, target=s[row]: 4.0 * green_free(wave, np.hypot(target, y)),
				grid, index, left, float(np.hypot(left, s[row])))

	return direct + image, cross


def single_layer_matrix(k : WavenumberLike, grid : BoundaryGrid) -> np.ndarray:
	"""Full (nodes_total x nodes_total) boundary single-layer quadrature matrix"""
	same, cross = single_layer_blocks(k, grid)
	return np.block([[same, cross], [cross, same]])


def operator_B_matrix(k : WavenumberLike, grid : BoundaryGrid, pot : BoundaryPotential) -> np.ndarray:
	"""Discrete B(k) (without the identity), weights folded in"""
	x = grid.coordinates
	left_factor = pot.sqrt_abs(x)
	right_factor = pot.signed_sqrt(x)
	if not np.any(left_factor) or not np.any(right_factor):
		return np.zeros((grid.nodes_total, grid.nodes_total), dtype=complex)
	return -left_factor[:, None] * single_layer_matrix(k, grid) * right_factor[None, :]


class KernelMatrix():
	"""
	The assembled Nyström matrix of 1 + B(k). Immutable after assembly; the LU factorization and the singular
	values are computed lazily once (guarded by a lock) and may then be shared by concurrent solves.
	"""
	def __init__(self, wave : Wavenumber, grid : BoundaryGrid, pot : BoundaryPotential, entries : np.ndarray):
		self.wave = wave
		self.grid = grid
		self.pot = pot
		self.entries = entries
		self.entries.setflags(write=False)
		self.is_identity = not np.any(pot.sqrt_abs(grid.coordinates))
		self._lock = threading.Lock()
		self._lu : typing.Tuple[np.ndarray, np.ndarray] | None = None
		self._condition : float | None = None
		self._singular_values : np.ndarray | None = None

	@property
	def k(self) -> complex:
		"""The wavenumber"""
		return self.wave.k

	@property
	def size(self) -> int:
		"""Number of unknowns"""
		return self.entries.shape[0]

	def lu_factors(self) -> typing.Tuple[np.ndarray, np.ndarray]:
		"""LU factorization (computed once)"""
		with self._lock:
			if self._lu is None:
				self._lu = scipy.linalg.lu_factor(self.entries)
				if self.is_identity:
					self._condition = 1.0
				else:
					gecon, = scipy.linalg.get_lapack_funcs(("gecon",), (self._lu[0],))
					anorm = np.linalg.norm(self.entries, 1)
					rcond, _info = gecon(self._lu[0], anorm, norm="1")
					self._condition = float(np.inf) if rcond == 0 else float(1.0 / rcond)
			return self._lu

	def condition_estimate(self) -> float:
		"""1-norm condition number estimate from the LU factors"""
		self.lu_factors()
		return self._condition #type: ignore

	def apply(self, density : np.ndarray) -> np.ndarray:
		"""(1 + B)·density"""
		return self.entries @ density

	def solve(self,
			rhs : np.ndarray,
			condition_limit : float | None = None,
			residual_tolerance : float | None = None
		) -> np.ndarray:
		"""Solve (1 + B)h = rhs. Limits left at None are taken from set_solver_limits.

		Raises:
			DomainError: rhs has the wrong length
			NearSingularError: the condition estimate exceeds condition_limit
			NumericalError: the residual contract could not be met after one refinement step
		"""
		if condition_limit is None:
			condition_limit = _solver_limits["condition_limit"]
		if residual_tolerance is None:
			residual_tolerance = _solver_limits["residual_tolerance"]
		rhs = np.asarray(rhs, dtype=complex)
		if rhs.shape != (self.size,):
			raise DomainError(f"Right-hand side has shape {rhs.shape}, expected ({self.size},)")
		if self.is_identity:
			return rhs.copy()
		factors = self.lu_factors()
		condition = self.condition_estimate()
		if condition > condition_limit:
			raise NearSingularError(f"1+B(k) is near-singular at k={self.wave} (condition estimate {condition:.3e}): "
				"possible point of the exceptional set or bound state", condition)
		solution = scipy.linalg.lu_solve(factors, rhs)
		target = residual_tolerance * np.linalg.norm(rhs)
		residual = rhs - self.apply(solution)
		if np.linalg.norm(residual) > target:
			solution = solution + scipy.linalg.lu_solve(factors, residual)
			residual = rhs - self.apply(solution)
			if np.linalg.norm(residual) > target:
				raise NumericalError(f"Residual {np.linalg.norm(residual):.3e} exceeds {target:.3e} at k={self.wave}")
		return solution

	def balanced(self) -> np.ndarray:
		"""W^{1/2}(1 + B)W^{-1/2}: similar to the Nyström matrix, approximates 1 + B on L² of the boundary"""
		root = np.sqrt(self.grid.weights)
		return root[:, None] * self.entries / root[None, :]

	def singular_values(self) -> np.ndarray:
		"""Singular values of the balanced matrix, descending"""
		with self._lock:
			if self._singular_values is None:
				if self.is_identity:
					self._singular_values = np.ones(self.size)
				else:
					self._singular_values = scipy.linalg.svdvals(self.balanced())
			return self._singular_values

	def min_singular_value(self) -> float:
		"""Smallest singular value (exactly 1 for a vanishing potential)"""
		return float(self.singular_values()[-1])

	def negative_eigenvalue_count(self) -> int:
		"""Number of eigenvalues of 1 + B(iκ) with negative real part.

		For k = iκ the spectrum of B is real (σ𝔊⁽⁰⁾ is similar to a symmetric operator) and each eigenvalue of
		1 + B(iκ) increases with κ, so the count equals the number of bound states with binding wavenumber > κ.
		"""
		if self.is_identity:
			return 0
		eigenvalues = scipy.linalg.eigvals(self.balanced())
		return int(np.count_nonzero(eigenvalues.real < 0))

	def null_vector(self) -> np.ndarray:
		"""Right singular vector of the smallest singular value, mapped back to nodal values"""
		_u, _s, vh = scipy.linalg.svd(self.balanced())
		vector = vh[-1].conj() / np.sqrt(self.grid.weights)
		return vector / vector[np.argmax(np.abs(vector))]


def assemble(k : WavenumberLike, grid : BoundaryGrid, pot : BoundaryPotential) -> KernelMatrix:
	"""Assemble the Nyström matrix of 1 + B(k).

	Raises:
		NumericalError: a non-finite entry was produced (the message names the first bad node pair)
	"""
	wave = as_wavenumber(k)
	entries = np.eye(grid.nodes_total, dtype=complex) + operator_B_matrix(wave, grid, pot)
	if not np.all(np.isfinite(entries)):
		row, col = np.argwhere(~np.isfinite(entries))[0]
		raise NumericalError(f"Non-finite kernel entry at node pair ({row}, {col}) for k={wave}")
	return KernelMatrix(wave, grid, pot, entries)


def solve(mat : KernelMatrix, rhs : np.ndarray, **kwargs) -> np.ndarray:
	"""Solve (1 + B(k))h = rhs, see KernelMatrix.solve"""
	return mat.solve(rhs, **kwargs)


def min_singular_value(mat : KernelMatrix) -> float:
	"""Smallest singular value of the discrete 1 + B(k)"""
	return mat.min_singular_value()


def apply_B(k : WavenumberLike, grid : BoundaryGrid, pot : BoundaryPotential, density : np.ndarray) -> np.ndarray: #pylint: disable=invalid-name
	"""B(k)·density at the grid nodes"""
	density = np.asarray(density, dtype=complex)
	if density.shape != (grid.nodes_total,):
		raise DomainError(f"Density has shape {density.shape}, expected ({grid.nodes_total},)")
	return operator_B_matrix(k, grid, pot) @ density


def layer_potential(k : WavenumberLike, grid : BoundaryGrid, density : np.ndarray, points : np.ndarray,
		chunk_size : int = 256
	) -> np.ndarray:
	"""u(x) = ∫ 𝔊⁽⁰⁾(k)(x, y)·density(y) dy over both half-lines, for arbitrary points of the closed quarter plane.

	The density is given by its nodal values and is interpolated per panel. Panels closer to x than half their
	length are integrated with a rule graded toward the projection of x onto the panel, so x may lie on the
	boundary or arbitrarily close to it.

	Args:
		k (WavenumberLike): wavenumber
		grid (BoundaryGrid): the grid carrying the density
		density (np.ndarray): nodal values, length nodes_total
		points (np.ndarray): evaluation points, shape (m, 2) (or a single point)
		chunk_size (int, optional): points per vectorized block. Defaults to 256.

	Returns:
		np.ndarray: u at the points, shape (m,) (or a scalar for a single point)
	"""
	wave = as_wavenumber(k)
	density = np.asarray(density, dtype=complex)
	converted = as_points(points)
	single = converted.ndim == 1
	pts = np.atleast_2d(converted)
	nodes = grid.plane_points
	weighted = density * grid.weights
	result = np.empty(len(pts), dtype=complex)

	for start in range(0, len(pts), chunk_size):
		block = pts[start:start + chunk_size]
		result[start:start + len(block)] = _layer_block(wave, grid, density, weighted, nodes, block)

	if single:
		return result[0]
	return result


def _layer_block(wave : Wavenumber, grid : BoundaryGrid, density : np.ndarray, weighted : np.ndarray,
		nodes : np.ndarray, block : np.ndarray
	) -> np.ndarray:
	near_pairs = []
	safe = np.ones((len(block), grid.nodes_total), dtype=bool)
	for axis in (0, 1):
		along, across = block[:, axis], block[:, 1 - axis] #Coordinate along the axis and distance to it
		for index in range(grid.panel_count):
			left, right = grid.panel(index)
			half = 0.5 * (right - left)
			focus = np.clip(along, left, right)
			distance = np.hypot(along - focus, across)
			for row in np.nonzero(distance <= half * (NEAR_LIMIT - 1.0))[0]:
				near_pairs.append((row, axis, index, float(focus[row]), float(distance[row])))
				safe[row, grid.panel_slice(index, axis)] = False

	values = np.zeros((len(block), grid.nodes_total), dtype=complex)
	if np.any(safe):
		rows, cols = np.nonzero(safe)
		values[rows, cols] = green_images(wave, block[rows], nodes[cols])
	result = values @ weighted

	for row, axis, index, focus, distance in near_pairs:
		left, right = grid.panel(index)
		ts, ws = graded_rule(left, right, focus, distance)
		sources = np.zeros((len(ts), 2))
		sources[:, axis] = ts
		kernel = green_images(wave, block[row][None, :], sources)
		panel_density = density[grid.panel_slice(index, axis)]
		result[row] += (kernel * ws) @ (grid.interpolation_matrix(index, ts) @ panel_density)
	return result
