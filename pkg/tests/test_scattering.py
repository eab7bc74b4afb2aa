import numpy as np
import numpy.testing as npt
import pytest

from quarterwave.core import scattering
from quarterwave.core.exceptions import DomainError
from quarterwave.core.nystrom import assemble, build_grid
from quarterwave.core.potential import BoundaryPotential
from quarterwave.core.scattering import AmplitudeMethod, IncomingWave, Normalization


def test_incoming_wave():
	wave = IncomingWave.from_degrees(2.0, 60.0)
	npt.assert_allclose((wave.k1, wave.k2), (1.0, np.sqrt(3.0)))
	with pytest.raises(DomainError):
		IncomingWave(0.0, (1.0, 0.0))
	with pytest.raises(DomainError):
		IncomingWave(1.0, (1.0, 1.0))


def test_symmetrized_plane_wave(step_pot, step_grid):
	wave = IncomingWave.from_degrees(1.5, 30.0)
	assert scattering.sym_plane_wave(wave, np.zeros(2)) == 4.0
	point = np.array([0.4, 1.1])
	expected = sum(np.exp(1j * (s1 * wave.k1 * point[0] + s2 * wave.k2 * point[1])) for s1 in (1, -1) for s2 in (1, -1))
	npt.assert_allclose(scattering.sym_plane_wave(wave, point), expected, rtol=1e-14)
	rhs = scattering.boundary_rhs(wave, step_pot, step_grid)
	n = step_grid.nodes_per_axis
	npt.assert_allclose(rhs[:n], 4.0 * np.cos(wave.k1 * step_grid.axis_nodes))
	npt.assert_allclose(rhs[n:], 4.0 * np.cos(wave.k2 * step_grid.axis_nodes))


def test_free_case_has_no_scattering(step_pot):
	pot = step_pot.with_alpha(0.0)
	grid = build_grid(pot)
	wave = IncomingWave.from_degrees(1.0, 30.0)
	record = scattering.scattering_amplitude(wave, scattering.direction_from_degrees(60.0), pot, grid)
	assert record.f == 0
	points = np.array([[0.0, 0.0], [1.0, 2.0]])
	npt.assert_array_equal(scattering.generalized_eigenfunction(wave, pot, grid, points),
		scattering.sym_plane_wave(wave, points))
	assert scattering.weak_coupling_amplitude(wave, (0.6, 0.8), pot).f == 0


def test_amplitude_needs_direction_off_the_axes(step_pot, step_grid):
	wave = IncomingWave.from_degrees(1.0, 30.0)
	with pytest.raises(DomainError):
		scattering.scattering_amplitude(wave, (1.0, 0.0), step_pot, step_grid)
	with pytest.raises(DomainError):
		scattering.far_field_amplitude(wave, (-0.6, 0.8), step_pot, step_grid)


def test_amplitude_conventions(step_pot, step_grid):
	wave = IncomingWave.from_degrees(1.0, 30.0)
	direction = scattering.direction_from_degrees(50.0)
	matrix = assemble(wave.wavenumber, step_grid, step_pot)
	far = scattering.scattering_amplitude(wave, direction, step_pot, step_grid, matrix)
	displayed = scattering.scattering_amplitude(wave, direction, step_pot, step_grid, matrix, "displayed")
	assert displayed.f == -far.f
	assert far.method is AmplitudeMethod.FULL
	row = far.to_row()
	assert list(row) == ["k", "omega_deg", "omega_prime_deg", "re_f", "im_f", "abs2_f", "method"]
	npt.assert_allclose((row["omega_deg"], row["omega_prime_deg"]), (30.0, 50.0))
	npt.assert_allclose(row["abs2_f"], abs(far.f) ** 2)


def test_amplitude_is_the_far_field_coefficient(step_pot, step_grid):
	wave = IncomingWave.from_degrees(1.0, 30.0)
	direction = scattering.direction_from_degrees(50.0)
	amplitude = scattering.scattering_amplitude(wave, direction, step_pot, step_grid).f
	estimate = scattering.far_field_amplitude(wave, direction, step_pot, step_grid, radius=400.0)
	npt.assert_allclose(estimate, amplitude, rtol=1e-2)


def test_sigma_hat_closed_form_values(step_pot):
	npt.assert_allclose(scattering.sigma_hat(1.0, np.pi / 2, step_pot, closed_form=True),
		-(8.0 / np.pi) * np.sqrt(1j / (2.0 * np.pi)), rtol=1e-14)
	assert abs(scattering.sigma_hat(1.0, np.pi, step_pot, closed_form=True)) < 1e-15
	npt.assert_allclose(scattering.sigma_hat(1.0, 0.0, step_pot, closed_form=True),
		-4.0 * np.sqrt(1j / (2.0 * np.pi)), rtol=1e-14)


def test_sigma_hat_quadrature_matches_closed_form(step_pot):
	xi = np.linspace(-20.0, 20.0, 41)
	for k in (0.5, 3.0):
		npt.assert_allclose(scattering.sigma_hat(k, xi, step_pot), scattering.sigma_hat(k, xi, step_pot,
			closed_form=True), atol=1e-10)


def test_sigma_hat_arguments():
	with pytest.raises(DomainError):
		scattering.sigma_hat(0.0, 1.0, BoundaryPotential.step(1.0, 1.0))
	with pytest.raises(DomainError):
		scattering.sigma_hat(1.0, 1.0, BoundaryPotential.exponential(1.0, 1.0), closed_form=True)


def test_sigma_hat_ignores_the_coupling():
	npt.assert_array_equal(scattering.sigma_hat(1.0, 2.0, BoundaryPotential.exponential(1.0, 2.0, alpha=0.3)),
		scattering.sigma_hat(1.0, 2.0, BoundaryPotential.exponential(1.0, 2.0)))


def test_weak_coupling_normalizations(step_pot):
	wave = IncomingWave.from_degrees(1.3, 20.0)
	direction = scattering.direction_from_degrees(70.0)
	far = scattering.weak_coupling_amplitude(wave, direction, step_pot, alpha=0.1)
	displayed = scattering.weak_coupling_amplitude(wave, direction, step_pot, alpha=0.1,
		normalization=Normalization.DISPLAYED)
	npt.assert_allclose(displayed.f, -2.0 * far.f, rtol=1e-14)
	assert far.method is AmplitudeMethod.WEAK_COUPLING


def test_weak_coupling_is_first_order_term(step_pot):
	wave = IncomingWave.from_degrees(1.0, 30.0)
	direction = scattering.direction_from_degrees(50.0)
	pot = step_pot.with_alpha(1e-4)
	full = scattering.scattering_amplitude(wave, direction, pot, build_grid(pot)).f
	weak = scattering.weak_coupling_amplitude(wave, direction, pot).f
	assert abs(full - weak) < 1e-2 * abs(weak)


def test_low_energy_constant(step_pot):
	npt.assert_allclose(scattering.low_energy_constant(step_pot), scattering.LOW_ENERGY_REFERENCE, rtol=1e-6)
	npt.assert_allclose(scattering.low_energy_constant(step_pot, normalization="displayed"), 512.0 / np.pi, rtol=1e-6)
	with pytest.raises(DomainError):
		scattering.low_energy_constant(BoundaryPotential.exponential(1.0, 1.0))


def test_amplitude_sweep_order(step_pot):
	calls = []

	def recording_map(func, items):
		items = list(items)
		calls.append(items)
		return [func(item) for item in items]
	records = scattering.amplitude_sweep(step_pot, [1.0, 2.0], [30.0, 60.0], [45.0], method="weak_coupling",
		mapper=recording_map)
	assert calls == [[1.0, 2.0]]
	npt.assert_allclose([(record.k, record.omega_deg) for record in records],
		[(1.0, 30.0), (1.0, 60.0), (2.0, 30.0), (2.0, 60.0)])
	assert all(record.method is AmplitudeMethod.WEAK_COUPLING for record in records)


def test_full_sweep_reuses_the_grid(step_pot, step_grid):
	records = scattering.amplitude_sweep(step_pot, [1.0], [30.0], [40.0, 50.0], grid=step_grid)
	single = scattering.scattering_amplitude(IncomingWave.from_degrees(1.0, 30.0),
		scattering.direction_from_degrees(50.0), step_pot, step_grid)
	npt.assert_allclose(records[1].f, single.f, rtol=1e-12)


def test_amplitude_is_invariant_under_swapping_the_axes(step_pot, step_grid):
	wave = IncomingWave.from_degrees(1.0, 30.0)
	direction = scattering.direction_from_degrees(50.0)
	swapped_wave = IncomingWave(wave.k, (wave.omega[1], wave.omega[0]))
	swapped_direction = (direction[1], direction[0])
	amplitude = scattering.scattering_amplitude(wave, direction, step_pot, step_grid).f
	swapped = scattering.scattering_amplitude(swapped_wave, swapped_direction, step_pot, step_grid).f
	npt.assert_allclose(swapped, amplitude, rtol=1e-10)


def test_far_field_estimate_settles_with_the_radius(step_pot, step_grid):
	wave = IncomingWave.from_degrees(1.0, 30.0)
	direction = scattering.direction_from_degrees(50.0)
	matrix = assemble(wave.wavenumber, step_grid, step_pot)
	amplitude = scattering.scattering_amplitude(wave, direction, step_pot, step_grid, matrix).f
	estimates = [scattering.far_field_amplitude(wave, direction, step_pot, step_grid, radius / wave.k, matrix)
		for radius in (20.0, 40.0, 80.0)]
	errors = [abs(estimate - amplitude) for estimate in estimates]
	assert errors[2] < 0.5 * errors[0]
	assert abs(estimates[2] - estimates[1]) <= 0.05 * abs(estimates[2])


def test_amplitude_is_stable_under_grid_doubling(step_pot, step_grid):
	wave = IncomingWave.from_degrees(1.0, 45.0)
	direction = scattering.direction_from_degrees(60.0)
	amplitude = scattering.scattering_amplitude(wave, direction, step_pot, step_grid).f
	refined = scattering.scattering_amplitude(wave, direction, step_pot, build_grid(step_pot, panels_per_axis=16)).f
	assert abs(refined - amplitude) <= 1e-6 * abs(amplitude)
