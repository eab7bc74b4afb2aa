import numpy as np
import numpy.testing as npt
import pytest

from quarterwave.core import fd_oracle
from quarterwave.core.exceptions import DomainError, ValidationError
from quarterwave.core.potential import BoundaryPotential
from quarterwave.core.resolvent import SampledField


def test_operator_layout(step_pot):
	op = fd_oracle.assemble_fd(step_pot, 4.0, 0.5)
	assert op.n == 8
	assert op.size == 64
	assert op.is_symmetric()
	assert op.points.shape == (64, 2)
	npt.assert_array_equal(op.points[9], [0.5, 0.5])
	assert op.mass[0] == 0.25
	assert op.mass[1] == 0.5
	assert op.mass[9] == 1.0


@pytest.mark.parametrize("box, step", [(1.0, 0.3), (1.0, 0.5), (-1.0, 0.1), (1.0, 0.0)])
def test_operator_arguments(step_pot, box, step):
	with pytest.raises(ValidationError):
		fd_oracle.assemble_fd(step_pot, box, step)


def test_cell_averages_split_at_the_step(step_pot):
	npt.assert_allclose(fd_oracle.cell_averages(step_pot, 0.5, 4), [1.0, 1.0, 0.5, 0.0], rtol=1e-14)


def test_neumann_eigenvalue_is_exact(step_pot):
	"""Without a potential the lowest mode is cos(πx1/2X)cos(πx2/2X) sampled on the grid"""
	op = fd_oracle.assemble_fd(step_pot.with_alpha(0.0), 4.0, 0.5)
	npt.assert_allclose(fd_oracle.lowest_eigenvalues(op), [8.0 * np.sin(np.pi * 0.5 / 16.0) ** 2 / 0.25], rtol=1e-10)


def test_constant_robin_eigenvalue_is_exact():
	"""For σ = 1 on the whole box the discrete problem separates; each axis contributes -2(√(1+h²)-1)/h²"""
	h = 0.25
	op = fd_oracle.assemble_fd(BoundaryPotential.step(1.0, 12.0), 12.0, h)
	expected = -4.0 * (np.sqrt(1.0 + h * h) - 1.0) / (h * h)
	npt.assert_allclose(fd_oracle.lowest_eigenvalues(op, m=2)[0], expected, rtol=1e-8)


def test_lowest_eigenvector_is_normalized():
	op = fd_oracle.assemble_fd(BoundaryPotential.step(1.0, 3.0), 3.0, 0.25)
	value, vector = fd_oracle.lowest_eigenvector(op)
	npt.assert_allclose(np.sum(op.mass * vector ** 2) * op.h ** 2, 1.0, rtol=1e-12)
	assert vector[0] > 0
	npt.assert_allclose(value, fd_oracle.lowest_eigenvalues(op)[0], rtol=1e-8)
	with pytest.raises(DomainError):
		fd_oracle.lowest_eigenvalues(op, m=0)


def test_resolvent_solve(step_pot):
	op = fd_oracle.assemble_fd(step_pot, 4.0, 0.25)
	source = SampledField.from_function(lambda points: np.exp(-np.sum((points - 1.0) ** 2, axis=-1)), 4.0, 0.25)
	solution = fd_oracle.fd_resolvent_solve(op, -1.0 + 0.5j, source)
	assert solution.values.shape == (17, 17)
	npt.assert_array_equal(solution.values[-1], 0.0)
	vector = solution.values[:op.n, :op.n].ravel()
	residual = (op.stiffness + (1.0 - 0.5j) * op.mass_matrix()) @ vector - op.mass * source.evaluate(op.points)
	assert np.linalg.norm(residual) < 1e-9 * np.linalg.norm(op.mass * source.evaluate(op.points))
	zero = fd_oracle.fd_resolvent_solve(op, -1.0, SampledField.zeros(4.0, 0.25))
	assert zero.is_zero()


def test_richardson_arithmetic():
	npt.assert_allclose(fd_oracle.richardson_extrapolate([1.04, 1.01]), 1.0, rtol=1e-14)
	npt.assert_allclose(fd_oracle.richardson_extrapolate([2.0, 1.5], ratio=2.0, order=1.0), 1.0, rtol=1e-14)
	npt.assert_allclose(fd_oracle.observed_order([2.0, 1.25, 1.0625]), 2.0, rtol=1e-12)
	assert fd_oracle.observed_order([1.0, 1.0, 1.0]) == float("inf")
	with pytest.raises(DomainError):
		fd_oracle.richardson_extrapolate([1.0])
	with pytest.raises(DomainError):
		fd_oracle.observed_order([1.0, 2.0])


@pytest.mark.parametrize("pot", [BoundaryPotential.step(1.0, 8.0), BoundaryPotential.exponential(sigma0=2.0, mu=1.0)])
def test_lowest_eigenvalue_converges_at_second_order(pot):
	values = [fd_oracle.lowest_eigenvalues(fd_oracle.assemble_fd(pot, 8.0, h))[0] for h in (0.25, 0.125, 0.0625)]
	assert fd_oracle.observed_order(values) >= 1.8


def test_lowest_eigenvalue_is_stable_under_box_growth():
	pot = BoundaryPotential.step(2.0, 1.0)
	h = 0.25
	estimate = fd_oracle.lowest_eigenvalues(fd_oracle.assemble_fd(pot, 8.0, h))[0]
	assert estimate < 0
	kappa = np.sqrt(-estimate)
	box = 2.0 * h * np.ceil(10.0 / (kappa * h)) #κX >= 20, X and 1.5X multiples of h
	small = fd_oracle.lowest_eigenvalues(fd_oracle.assemble_fd(pot, box, h))[0]
	large = fd_oracle.lowest_eigenvalues(fd_oracle.assemble_fd(pot, 1.5 * box, h))[0]
	assert kappa * box >= 20
	assert abs(large - small) <= 1e-6
