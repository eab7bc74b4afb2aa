"""
Finite-difference discretization of -Δ on the truncated quarter plane [0, X]² with the Robin condition
∂_n u + σu = 0 on the two axes (∂_n the inward normal derivative) and u = 0 on the two far sides.

Nodes sit at (i·h, j·h), i, j = 0..n-1 with n = X/h. The 5-point stencil with ghost-point elimination of the Robin
condition becomes symmetric once the boundary rows are scaled by their dual-cell areas (1/2 on the axes, 1/4 at
the corner), so the discrete problem is the generalized symmetric pencil

	K u = λ M u,    K = (A⊗M1 + M1⊗A)/h² - (E⊗D + D⊗E)/h,    M = M1⊗M1,

with A the 1D second-difference matrix (Neumann-type first row, Dirichlet last row), M1 = diag(1/2, 1, ..., 1),
E = e0·e0ᵀ and D = diag(M1·σ̄), σ̄ the dual-cell averages of σ along an axis.
"""

import logging
import typing
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse
import scipy.sparse.linalg

from quarterwave.core.exceptions import (ConditioningError, DomainError, FdConvergenceError, QuarterwaveWarning,
                                         ValidationError)
from quarterwave.core.potential import BoundaryPotential
from quarterwave.core.resolvent import SampledField

log = logging.getLogger(__name__)

DEFAULT_RESIDUAL_TOLERANCE = 1e-10
_CELL_ORDER = 8


@dataclass(frozen=True, eq=False)
class FdOperator():
	"""Assembled finite-difference Robin Laplacian (immutable)"""
	pot : BoundaryPotential
	X : float #pylint: disable=invalid-name
	h : float
	n : int
	stiffness : scipy.sparse.csr_matrix = field(repr=False)
	mass : np.ndarray = field(repr=False) #Diagonal of M
	sigma_cells : np.ndarray = field(repr=False) #σ̄ at the nodes of one axis

	@property
	def size(self) -> int:
		"""Number of unknowns n²"""
		return self.n * self.n

	@property
	def axis(self) -> np.ndarray:
		"""Node abscissae along one axis"""
		return np.arange(self.n) * self.h

	@property
	def points(self) -> np.ndarray:
		"""Node coordinates, row-major (i along x1 varies slowest), shape (n², 2)"""
		x1, x2 = np.meshgrid(self.axis, self.axis, indexing="ij")
		return np.stack([x1.ravel(), x2.ravel()], axis=-1)

	def mass_matrix(self) -> scipy.sparse.dia_matrix:
		"""M as a sparse diagonal matrix"""
		return scipy.sparse.diags(self.mass)

	def is_symmetric(self) -> bool:
		"""Exact symmetry of the stiffness matrix"""
		return (self.stiffness != self.stiffness.T).nnz == 0

	def to_field(self, vector : np.ndarray) -> SampledField:
		"""Nodal vector as a SampledField on [0, X]², including the zero Dirichlet row/column at X"""
		values = np.zeros((self.n + 1, self.n + 1), dtype=complex)
		values[:self.n, :self.n] = np.asarray(vector).reshape(self.n, self.n)
		return SampledField(X=self.X, h=self.h, values=values)


def cell_averages(pot : BoundaryPotential, h : float, n : int) -> np.ndarray:
	"""Averages of α·σ over the dual cells [jh - h/2, jh + h/2] ∩ [0, ∞), j = 0..n-1, by Gauss quadrature split
	at the breakpoints of σ"""
	ref_nodes, ref_weights = np.polynomial.legendre.leggauss(_CELL_ORDER)
	breakpoints = np.asarray(pot.breakpoints(), dtype=float)
	averages = np.empty(n)
	for j in range(n):
		left, right = max(0.0, (j - 0.5) * h), (j + 0.5) * h
		edges = [left, *breakpoints[(breakpoints > left) & (breakpoints < right)], right]
		total = 0.0
		for a, b in zip(edges[:-1], edges[1:]):
			nodes = 0.5 * (b - a) * ref_nodes + 0.5 * (a + b)
			total += 0.5 * (b - a) * float(np.dot(ref_weights, pot.eval(nodes)))
		averages[j] = total / (right - left)
	return averages


def assemble_fd(pot : BoundaryPotential, X : float, h : float) -> FdOperator: #pylint: disable=invalid-name
	"""Assemble the finite-difference Robin Laplacian on [0, X]².

	Raises:
		ValidationError: X/h is not an integer or fewer than 3 nodes per side result

	Returns:
		FdOperator: the operator
	"""
	if not (X > 0 and h > 0):
		raise ValidationError(f"X and h must be positive, got X={X}, h={h}")
	ratio = X / h
	if abs(ratio - round(ratio)) > 1e-9 * max(1.0, ratio):
		raise ValidationError(f"X={X} is not an integer multiple of h={h} (n = X/h must be an integer)")
	n = int(round(ratio))
	if n < 3:
		raise ValidationError(f"Grid too small: n = X/h = {n} < 3")

	sup = pot.sup_abs()
	if sup > 0:
		radius = pot.support_radius(1e-10 * sup)
		if radius < X < 4 * radius:
			message = f"Truncation X={X} is below 4x the support radius {radius:.4g} of the potential"
			log.warning(message)
			warnings.warn(message, QuarterwaveWarning)

	half_mass = np.ones(n)
	half_mass[0] = 0.5
	second_difference = scipy.sparse.diags([-np.ones(n - 1), 2.0 * np.ones(n), -np.ones(n - 1)], [-1, 0, 1],
		format="lil")
	second_difference[0, 0] = 1.0
	second_difference = second_difference.tocsr()
	mass_1d = scipy.sparse.diags(half_mass)

	sigma_cells = cell_averages(pot, h, n)
	corner = scipy.sparse.csr_matrix(([1.0], ([0], [0])), shape=(n, n))
	boundary_1d = scipy.sparse.diags(half_mass * sigma_cells)

	stiffness = (scipy.sparse.kron(second_difference, mass_1d) + scipy.sparse.kron(mass_1d, second_difference)) / h ** 2 \
		- (scipy.sparse.kron(corner, boundary_1d) + scipy.sparse.kron(boundary_1d, corner)) / h
	mass = np.kron(half_mass, half_mass)
	log.debug(f"Assembled finite-difference operator with {n * n} unknowns (X={X}, h={h})")
	return FdOperator(pot=pot, X=float(X), h=float(h), n=n, stiffness=stiffness.tocsr(), mass=mass,
		sigma_cells=sigma_cells)


def lowest_eigenvalues(op : FdOperator, m : int = 1, tolerance : float = 1e-10, max_iterations : int | None = None
		) -> typing.List[float]:
	"""The m smallest eigenvalues of K u = λ M u by shift-invert Lanczos, shifted below the spectrum.

	The shift -2.5·sup|σ|² - 0.1 lies below every eigenvalue since the Robin form is bounded below by -2·sup|σ|².

	Raises:
		DomainError: m < 1 or m too large for the grid
		FdConvergenceError: the iteration did not converge
	"""
	if m < 1 or m >= op.size - 1:
		raise DomainError(f"Number of eigenvalues must satisfy 1 <= m < {op.size - 1}, got {m}")
	shift = -2.5 * op.pot.sup_abs() ** 2 - 0.1
	try:
		values = scipy.sparse.linalg.eigsh(op.stiffness.tocsc(), k=m, M=op.mass_matrix().tocsc(), sigma=shift,
			which="LM", tol=tolerance, maxiter=max_iterations, return_eigenvectors=False)
	except scipy.sparse.linalg.ArpackNoConvergence as exception:
		raise FdConvergenceError(f"Eigen-iteration did not converge for {m} eigenvalue(s) on n={op.n} (h={op.h}): "
			f"{len(exception.eigenvalues)} converged, shift {shift:.4g}") from exception
	result = sorted(float(value) for value in values)
	log.debug(f"Lowest finite-difference eigenvalues (h={op.h}): {result}")
	return result


def lowest_eigenvector(op : FdOperator) -> typing.Tuple[float, np.ndarray]:
	"""Lowest eigenpair, eigenvector M-normalized and positive at the corner"""
	shift = -2.5 * op.pot.sup_abs() ** 2 - 0.1
	try:
		values, vectors = scipy.sparse.linalg.eigsh(op.stiffness.tocsc(), k=1, M=op.mass_matrix().tocsc(),
			sigma=shift, which="LM")
	except scipy.sparse.linalg.ArpackNoConvergence as exception:
		raise FdConvergenceError(f"Eigen-iteration did not converge on n={op.n} (h={op.h})") from exception
	vector = vectors[:, 0] / np.sqrt(np.sum(op.mass * vectors[:, 0] ** 2) * op.h ** 2)
	return float(values[0]), vector * np.sign(vector[0])


def fd_resolvent_solve(op : FdOperator, z : complex, f : SampledField,
		residual_tolerance : float = DEFAULT_RESIDUAL_TOLERANCE
	) -> SampledField:
	"""Solve (A - z)u = f, i.e. (K - zM)u = M f, and return u sampled on the operator grid.

	Raises:
		ConditioningError: the residual contract fails after one refinement (z too close to an eigenvalue)
	"""
	rhs = op.mass * f.evaluate(op.points)
	if not np.any(rhs):
		return op.to_field(np.zeros(op.size, dtype=complex))
	system = (op.stiffness - complex(z) * op.mass_matrix()).tocsc()
	solver = scipy.sparse.linalg.splu(system)
	solution = solver.solve(rhs.astype(complex))
	target = residual_tolerance * np.linalg.norm(rhs)
	residual = rhs - system @ solution
	if np.linalg.norm(residual) > target:
		solution = solution + solver.solve(residual)
		residual = rhs - system @ solution
		if np.linalg.norm(residual) > target:
			raise ConditioningError(f"Finite-difference resolvent residual {np.linalg.norm(residual):.3e} exceeds "
				f"{target:.3e} at z={z}: z is probably too close to an eigenvalue")
	return op.to_field(solution)


def richardson_extrapolate(values : typing.Sequence[float], ratio : float = 2.0, order : float = 2.0) -> float:
	"""Extrapolate the last two values of a refinement sequence (step divided by `ratio` each time) assuming an
	error ~ h^order"""
	if len(values) < 2:
		raise DomainError("Richardson extrapolation needs at least two values")
	coarse, fine = float(values[-2]), float(values[-1])
	return fine + (fine - coarse) / (ratio ** order - 1.0)


def observed_order(values : typing.Sequence[float], ratio : float = 2.0) -> float:
	"""Convergence order log(|v0 - v1| / |v1 - v2|) / log(ratio) from the last three values of a refinement
	sequence"""
	if len(values) < 3:
		raise DomainError("An observed order needs at least three values")
	v0, v1, v2 = (float(value) for value in values[-3:])
	if v1 == v2:
		return float("inf")
	return float(np.log(abs(v0 - v1) / abs(v1 - v2)) / np.log(ratio))
