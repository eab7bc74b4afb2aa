import numpy as np
import numpy.testing as npt
import pytest

from quarterwave.core import spectral
from quarterwave.core.exceptions import DomainError, QuarterwaveWarning
from quarterwave.core.nystrom import build_grid
from quarterwave.core.potential import BoundaryPotential


@pytest.fixture(scope="module")
def step_states(step_pot, step_grid):
	return spectral.find_bound_states(step_pot, 0.05, 3.0, samples=16, grid=step_grid)


def test_bound_state_range_is_checked(step_pot):
	with pytest.raises(DomainError):
		spectral.find_bound_states(step_pot, 0.0, 1.0)
	with pytest.raises(DomainError):
		spectral.find_bound_states(step_pot, 2.0, 1.0)
	with pytest.raises(DomainError):
		spectral.find_bound_states(step_pot, 0.1, 1.0, samples=1)


def test_vanishing_potential_has_no_bound_states(step_pot):
	assert spectral.find_bound_states(step_pot.with_alpha(0.0), 0.01, 3.0) == []


def test_step_potential_binds(step_pot, step_grid, step_states):
	assert len(step_states) >= 1
	kappas = [state.kappa for state in step_states]
	assert kappas == sorted(kappas)
	for state in step_states:
		assert 0.05 < state.kappa < 3.0
		assert state.energy == -state.kappa ** 2
		assert state.smin_at_root <= spectral.DEFAULT_ROOT_TOLERANCE
		assert state.to_row() == {"kappa": state.kappa, "energy": state.energy, "smin": state.smin_at_root}
		below = spectral.negative_count(state.kappa - 1e-4, step_pot, step_grid)
		above = spectral.negative_count(state.kappa + 1e-4, step_pot, step_grid)
		assert below - above >= 1


def test_bound_state_rejects_nonpositive_kappa():
	with pytest.raises(DomainError):
		spectral.BoundState(kappa=0.0, smin_at_root=0.0)


def test_bound_state_eigenfunction_is_normalized(step_pot, step_grid, step_states):
	state = step_states[0]
	box = 20.0 / state.kappa
	corner = spectral.bound_state_eigenfunction(state, step_pot, step_grid, np.array([0.0, 0.0]))
	assert abs(corner.imag) < 1e-10 * abs(corner)
	assert corner.real > 0

	nodes, weights = np.polynomial.legendre.leggauss(40)
	nodes, weights = 0.5 * box * (nodes + 1.0), 0.5 * box * weights
	n1, n2 = np.meshgrid(nodes, nodes, indexing="ij")
	values = spectral.bound_state_eigenfunction(state, step_pot, step_grid, np.stack([n1.ravel(), n2.ravel()], axis=-1))
	npt.assert_allclose(np.sum(np.abs(values) ** 2 * np.outer(weights, weights).ravel()), 1.0, rtol=1e-8)


def test_scan_of_vanishing_potential(step_pot):
	scan = spectral.scan_positive_axis(step_pot.with_alpha(0.0), 0.5, 2.0, samples=4)
	npt.assert_array_equal(scan.smin, np.ones(4))
	assert scan.is_clear
	assert [row["k"] for row in scan.to_rows()] == [0.5, 1.0, 1.5, 2.0]


def test_scan_of_step_potential_is_clear(step_pot, step_grid):
	calls = []

	def recording_map(func, items):
		items = list(items)
		calls.append(len(items))
		return map(func, items)
	scan = spectral.scan_positive_axis(step_pot, 0.5, 3.0, samples=6, grid=step_grid, mapper=recording_map)
	assert calls == [6]
	assert scan.is_clear
	assert np.all(scan.smin > 1e-3)
	assert not any(row["flagged"] for row in scan.to_rows())
	with pytest.raises(DomainError):
		spectral.scan_positive_axis(step_pot, 3.0, 0.5)


@pytest.mark.parametrize("x, y", [
	((0.0, 0.0), (0.0, 0.0)),
	((1.0, 0.5), (0.3, 1.2)),
	((2.0, 0.0), (0.0, 3.0)),
	((0.7, 0.7), (4.0, 1.5)),
])
def test_projection_kernel_quadrature_matches_closed_form(x, y):
	quadrature = spectral.free_projection_kernel((0.5, 4.0), np.array(x), np.array(y))
	closed = spectral.free_projection_kernel_closed_form((0.5, 4.0), np.array(x), np.array(y))
	npt.assert_allclose(quadrature, closed, rtol=1e-10, atol=1e-13)


def test_projection_kernel_on_the_diagonal_at_the_corner():
	value = spectral.free_projection_kernel_closed_form((1.0, 4.0), np.zeros(2), np.zeros(2))
	npt.assert_allclose(value, 3.0 / np.pi, rtol=1e-14)
	assert spectral.free_projection_kernel((2.0, 2.0), np.zeros(2), np.ones(2)) == 0.0
	with pytest.raises(DomainError):
		spectral.free_projection_kernel((2.0, 1.0), np.zeros(2), np.ones(2))


@pytest.mark.parametrize("x, y", [((0.0, 0.0), (0.0, 0.0)), ((1.0, 0.5), (0.3, 1.2))])
def test_projection_kernel_against_lattice(x, y):
	closed = spectral.free_projection_kernel_closed_form((1.0, 4.0), np.array(x), np.array(y))
	lattice = spectral.lattice_projection_kernel((1.0, 4.0), np.array(x), np.array(y))
	npt.assert_allclose(lattice, closed, atol=1e-3)


def test_projection_is_nearly_idempotent():
	assert spectral.projection_idempotence_defect((0.0, 1.0)) < 5e-2
	with pytest.raises(DomainError):
		spectral.projection_idempotence_defect((0.0, 1.0), box=10.0, inner=20.0)


@pytest.mark.slow
def test_bound_states_are_stable_under_grid_doubling(step_pot, step_states):
	refined_grid = build_grid(step_pot, panels_per_axis=16)
	for state in step_states:
		refined = spectral.find_bound_states(step_pot, 0.95 * state.kappa, 1.05 * state.kappa, samples=4,
			grid=refined_grid)
		closest = min(refined, key=lambda other: abs(other.kappa - state.kappa))
		assert abs(closest.kappa - state.kappa) <= 1e-3 * state.kappa


@pytest.mark.slow
def test_binding_grows_with_the_coupling(step_pot):
	ground = []
	for alpha in (0.5, 1.0, 2.0):
		pot = step_pot.with_alpha(alpha)
		states = spectral.find_bound_states(pot, 0.01, 4.0, samples=24, root_tolerance=1e-6)
		assert states, f"no bound state found for alpha={alpha}"
		ground.append(states[-1].kappa)
	assert ground == sorted(ground)


def test_sign_changing_potential_warns():
	pot = BoundaryPotential.table([(0, 1), (1, -1), (2, 0)])
	with pytest.warns(QuarterwaveWarning, match="both signs"):
		spectral.find_bound_states(pot, 0.5, 1.0, samples=2)


@pytest.mark.slow
def test_root_above_tolerance_warns(step_pot, step_grid, step_states):
	state = step_states[-1]
	with pytest.warns(QuarterwaveWarning, match="exceeds the root tolerance"):
		states = spectral.find_bound_states(step_pot, 0.95 * state.kappa, 1.05 * state.kappa, samples=2,
			grid=step_grid, root_tolerance=1e-300)
	assert len(states) == 1
	npt.assert_allclose(states[0].kappa, state.kappa, rtol=1e-6)
	assert states[0].smin_at_root > 1e-300
