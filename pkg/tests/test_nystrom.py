import math

import numpy as np
import numpy.testing as npt
import pytest
import scipy.integrate
import scipy.special

from quarterwave.core import nystrom
from quarterwave.core.exceptions import DomainError, NearSingularError
from quarterwave.core.kernels import Wavenumber, green_images
from quarterwave.core.potential import BoundaryPotential


def test_step_grid_layout(step_grid):
	assert step_grid.X_max == 1.0
	assert step_grid.panel_count == 8
	assert step_grid.nodes_total == 2 * 8 * 16
	npt.assert_allclose(step_grid.edges[:5], [0.0, 1 / 64, 1 / 32, 1 / 16, 1 / 8])
	npt.assert_allclose(step_grid.axis_weights.sum(), 1.0, rtol=1e-14)
	assert np.all(step_grid.plane_points[:step_grid.nodes_per_axis, 1] == 0)
	assert np.all(step_grid.plane_points[step_grid.nodes_per_axis:, 0] == 0)


def test_grid_truncation_and_breakpoints():
	grid = nystrom.build_grid(BoundaryPotential.exponential(sigma0=1.0, mu=2.0))
	npt.assert_allclose(grid.X_max, math.log(1e10) / 2.0)
	grid = nystrom.build_grid(BoundaryPotential.step(1.0, 0.3), truncation_threshold=1e-3)
	assert grid.X_max == 0.3
	grid = nystrom.build_grid(BoundaryPotential.table([[0, 1], [2, 1], [3, 0]]))
	assert grid.X_max > 2.9


def test_grid_arguments_are_checked(step_pot):
	with pytest.raises(DomainError):
		nystrom.build_grid(step_pot, panels_per_axis=0)
	with pytest.raises(DomainError):
		nystrom.build_grid(step_pot, panels_per_axis=4, grading_levels=4)


def test_vanishing_potential_gives_identity(step_pot):
	pot = step_pot.with_alpha(0.0)
	grid = nystrom.build_grid(pot)
	matrix = nystrom.assemble(1.0, grid, pot)
	assert matrix.is_identity
	npt.assert_array_equal(matrix.entries, np.eye(grid.nodes_total))
	assert matrix.min_singular_value() == 1.0
	assert matrix.negative_eigenvalue_count() == 0
	rhs = np.arange(grid.nodes_total, dtype=complex)
	npt.assert_array_equal(nystrom.solve(matrix, rhs), rhs)


def _log_moment(u, n):
	def integrand(t):
		return np.log(abs(u - t)) * scipy.special.eval_legendre(n, t)
	if abs(u) < 1:
		return scipy.integrate.quad(integrand, -1, u, epsabs=1e-13)[0] + scipy.integrate.quad(integrand, u, 1,
			epsabs=1e-13)[0]
	return scipy.integrate.quad(integrand, -1, 1, epsabs=1e-13)[0]


@pytest.mark.parametrize("u", [0.3, -0.85, 1.7, -3.0])
def test_legendre_log_moments(u):
	moments = nystrom.legendre_log_moments(np.array([u]), 6)[0]
	npt.assert_allclose(moments, [_log_moment(u, n) for n in range(7)], atol=1e-10)


def test_graded_rule_integrates_polynomials():
	nodes, weights = nystrom.graded_rule(0.0, 1.0, 0.3, 1e-6)
	npt.assert_allclose(weights.sum(), 1.0, rtol=1e-14)
	npt.assert_allclose(weights @ nodes ** 5, 1 / 6, rtol=1e-13)
	assert np.all((nodes > 0) & (nodes < 1))


def test_single_layer_of_constant_density(step_grid):
	"""At k = i the kernel is real: compare the Nyström row sum with adaptive quadrature"""
	k = Wavenumber.imaginary(1.0)
	same, cross = nystrom.single_layer_blocks(k, step_grid)
	row = 100
	s = step_grid.axis_nodes[row]

	def green(r):
		return scipy.special.k0(r) / (2 * np.pi)
	direct = scipy.integrate.quad(lambda t: 2 * green(abs(s - t)), 0, s, epsabs=1e-14)[0] \
		+ scipy.integrate.quad(lambda t: 2 * green(abs(s - t)), s, 1, epsabs=1e-14)[0]
	image = scipy.integrate.quad(lambda t: 2 * green(s + t), 0, 1, epsabs=1e-14)[0]
	across = scipy.integrate.quad(lambda t: 4 * green(np.hypot(s, t)), 0, 1, epsabs=1e-14)[0]
	npt.assert_allclose((same.sum(axis=1) + cross.sum(axis=1))[row], direct + image + across, rtol=1e-9)


def test_operator_B_is_scaled_single_layer(step_pot, step_grid):
	density = np.cos(step_grid.coordinates) + 0j
	applied = nystrom.apply_B(2.0, step_grid, step_pot, density)
	expected = -nystrom.single_layer_matrix(2.0, step_grid) @ density
	npt.assert_allclose(applied, expected, rtol=1e-13)
	with pytest.raises(DomainError):
		nystrom.apply_B(2.0, step_grid, step_pot, density[:-1])


def test_solve_meets_residual(step_pot, step_grid):
	matrix = nystrom.assemble(1.5, step_grid, step_pot)
	rhs = np.exp(-step_grid.coordinates) + 0j
	solution = matrix.solve(rhs)
	assert np.linalg.norm(matrix.apply(solution) - rhs) <= 1e-10 * np.linalg.norm(rhs)
	assert matrix.condition_estimate() >= 1.0


def test_solver_limits_are_applied(step_pot, step_grid):
	matrix = nystrom.assemble(1.5, step_grid, step_pot)
	previous = nystrom.get_solver_limits()
	try:
		nystrom.set_solver_limits(condition_limit=1.0)
		with pytest.raises(NearSingularError) as info:
			matrix.solve(np.ones(matrix.size))
		assert info.value.condition > 1.0
	finally:
		nystrom.set_solver_limits(**previous)
	assert nystrom.get_solver_limits() == previous


def test_balanced_matrix_is_similar(step_pot, step_grid):
	matrix = nystrom.assemble(1j, step_grid, step_pot)
	npt.assert_allclose(np.sort(np.linalg.eigvals(matrix.balanced()).real),
		np.sort(np.linalg.eigvals(matrix.entries).real), atol=1e-9)


def test_layer_potential_far_from_boundary(step_grid):
	density = np.cos(step_grid.coordinates) + 0j
	point = np.array([6.0, 5.0])
	direct = green_images(1.0, point[None, :], step_grid.plane_points) @ (density * step_grid.weights)
	npt.assert_allclose(nystrom.layer_potential(1.0, step_grid, density, point), direct, rtol=1e-13)


def test_layer_potential_on_the_boundary(step_grid):
	density = np.cos(step_grid.coordinates) + 0j
	row = 100
	node = step_grid.plane_points[row]
	on_node = nystrom.layer_potential(1.0, step_grid, density, node)
	npt.assert_allclose(on_node, (nystrom.single_layer_matrix(1.0, step_grid) @ density)[row], rtol=1e-8)
	points = np.array([[0.5, 0.0], [0.5, 1e-7], [0.0, 0.0], [1e-9, 1e-9]])
	values = nystrom.layer_potential(1.0, step_grid, density, points)
	assert abs(values[0] - values[1]) < 1e-5
	assert abs(values[2] - values[3]) < 1e-5


def test_operator_action_converges_under_node_refinement(step_pot):
	"""∫ψ·B(i)φ over both axes for densities vanishing at the end of the support, at 4, 8 and 16 nodes per panel"""
	def smooth(t):
		return (1.0 - t) ** 3 * np.cos(t) + 0j
	values = []
	for nodes_per_panel in (4, 8, 16):
		grid = nystrom.build_grid(step_pot, nodes_per_panel=nodes_per_panel)
		density = smooth(grid.coordinates)
		applied = nystrom.apply_B(Wavenumber.imaginary(1.0), grid, step_pot, density)
		weights = np.concatenate([grid.axis_weights, grid.axis_weights])
		values.append(np.sum(weights * density * applied))
	coarse, fine = abs(values[0] - values[1]), abs(values[1] - values[2])
	assert fine == 0 or math.log2(coarse / fine) >= 3
