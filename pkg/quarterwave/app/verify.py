"""
The acceptance suite run by `quarterwave verify`: property checks of the solver on the shipped step potential
(and an exponential potential for the tail-decay check). Each check returns a CheckResult; a check that raises is
reported as failed with the exception text.
"""

import logging
import time
import typing
from dataclasses import dataclass, field

import numpy as np

from quarterwave.core import fd_oracle, nystrom, resolvent, scattering, spectral
from quarterwave.core.kernels import Wavenumber
from quarterwave.core.potential import BoundaryPotential

log = logging.getLogger(__name__)

RANDOM_SEED = 20240611
ROBIN_ANCHOR_BOX = 30.0
ROBIN_ANCHOR_STEPS = (0.05, 0.025)
REDUCED_ROBIN_ANCHOR_BOX = 12.0 #e^{-(x1+x2)} has relative mass e^{-24} beyond it
REDUCED_ROBIN_ANCHOR_STEPS = (0.1, 0.05)


@dataclass
class CheckResult():
	"""Outcome of one acceptance check"""
	name : str
	passed : bool
	value : float
	threshold : float
	detail : str = ""
	seconds : float = 0.0

	def to_row(self) -> typing.Dict[str, typing.Any]:
		"""Output row"""
		return {"check": self.name, "passed": self.passed, "value": float(self.value),
			"threshold": float(self.threshold), "seconds": round(self.seconds, 3), "detail": self.detail}


@dataclass
class AcceptanceCheck():
	"""A named check; `slow` checks can be skipped with --skip-slow"""
	name : str
	description : str
	run : typing.Callable[[], CheckResult] = field(repr=False)
	slow : bool = False


def step_potential(alpha : float = 1.0) -> BoundaryPotential:
	"""The shipped step potential σ0 = 1 on [0, 1]"""
	return BoundaryPotential.step(sigma0=1.0, L=1.0, alpha=alpha)


def check_free_case() -> CheckResult:
	"""α = 0: identity matrix, zero amplitude and ψ⁺ = S exactly"""
	pot = step_potential(alpha=0.0)
	grid = nystrom.build_grid(pot)
	matrix = nystrom.assemble(1.0, grid, pot)
	wave = scattering.IncomingWave.from_degrees(1.0, 30.0)
	points = np.array([[0.0, 0.0], [0.3, 1.7], [2.5, 0.0], [4.0, 3.0]])
	deviation = max(
		float(np.max(np.abs(matrix.entries - np.eye(matrix.size)))),
		abs(scattering.scattering_amplitude(wave, scattering.direction_from_degrees(60.0), pot, grid).f),
		float(np.max(np.abs(scattering.generalized_eigenfunction(wave, pot, grid, points)
			- scattering.sym_plane_wave(wave, points))))
	)
	return CheckResult("free_case", deviation <= 1e-14, deviation, 1e-14, "max deviation from the free solution")


def check_robin_anchor(box : float = ROBIN_ANCHOR_BOX, steps : typing.Sequence[float] = ROBIN_ANCHOR_STEPS,
		name : str = "robin_anchor"
	) -> CheckResult:
	"""Constant σ = 1 on the finite-difference oracle: lowest eigenvalue -2"""
	pot = BoundaryPotential.step(sigma0=1.0, L=box)
	values = [fd_oracle.lowest_eigenvalues(fd_oracle.assemble_fd(pot, box, h))[0] for h in steps]
	extrapolated = fd_oracle.richardson_extrapolate(values)
	error = abs(extrapolated + 2.0)
	return CheckResult(name, error <= 1e-3, error, 1e-3,
		f"eigenvalues {values} extrapolated to {extrapolated:.8f}")


def check_reduced_robin_anchor() -> CheckResult:
	"""The Robin anchor on [0, 12]² with h = 0.1 and 0.05, the variant that still runs with --skip-slow"""
	return check_robin_anchor(REDUCED_ROBIN_ANCHOR_BOX, REDUCED_ROBIN_ANCHOR_STEPS, "robin_anchor_reduced")


def check_bound_state_oracle(box : float = 16.0, steps : typing.Sequence[float] = (0.1, 0.05)) -> CheckResult:
	"""Ground state of the step potential: boundary integral vs extrapolated finite differences"""
	pot = step_potential()
	states = spectral.find_bound_states(pot, 0.01, 3.0, samples=32)
	if not states:
		return CheckResult("bound_state_oracle", False, float("inf"), 1e-2, "no bound state found")
	energy = states[-1].energy
	values = [fd_oracle.lowest_eigenvalues(fd_oracle.assemble_fd(pot, box, h))[0] for h in steps]
	fd_energy = fd_oracle.richardson_extrapolate(values)
	difference = abs(energy - fd_energy) / abs(energy)
	return CheckResult("bound_state_oracle", difference <= 1e-2, difference, 1e-2,
		f"boundary integral {energy:.8f}, finite differences {fd_energy:.8f}")


def smooth_bump(center : typing.Sequence[float], radius : typing.Sequence[float]
		) -> typing.Tuple[typing.Callable[[np.ndarray], np.ndarray], typing.Callable[[np.ndarray], np.ndarray]]:
	"""ψ(x) = Π_i (1 - s_i²)⁴ with s_i = (x_i - c_i)/r_i, zero for |s_i| >= 1, and its gradient"""
	center_arr = np.asarray(center, dtype=float)
	radius_arr = np.asarray(radius, dtype=float)

	def factors(points : np.ndarray) -> typing.Tuple[np.ndarray, np.ndarray]:
		s = (np.atleast_2d(points) - center_arr) / radius_arr
		inside = np.abs(s) < 1
		value = np.where(inside, (1.0 - s ** 2) ** 4, 0.0)
		derivative = np.where(inside, -8.0 * s * (1.0 - s ** 2) ** 3 / radius_arr, 0.0)
		return value, derivative

	def bump(points : np.ndarray) -> np.ndarray:
		value, _derivative = factors(points)
		return value[:, 0] * value[:, 1]

	def gradient(points : np.ndarray) -> np.ndarray:
		value, derivative = factors(points)
		return np.stack([derivative[:, 0] * value[:, 1], value[:, 0] * derivative[:, 1]], axis=-1)
	return bump, gradient


def check_resolvent_oracle(box : float = 12.0, step : float = 0.05) -> CheckResult:
	"""R(-1)f for a bump on [1, 3]²: boundary integral vs finite differences"""
	pot = step_potential()
	bump, _gradient = smooth_bump((2.0, 2.0), (1.0, 1.0))
	f = resolvent.SampledField.from_function(bump, X=6.0, h=0.1)
	axis = np.arange(0.0, 6.0 + 1e-9, 0.5)
	x1, x2 = np.meshgrid(axis, axis, indexing="ij")
	points = np.stack([x1.ravel(), x2.ravel()], axis=-1)
	integral = resolvent.apply_resolvent(-1.0, f, pot, points)
	reference = fd_oracle.fd_resolvent_solve(fd_oracle.assemble_fd(pot, box, step), -1.0, f).evaluate(points)
	difference = float(np.linalg.norm(integral - reference) / np.linalg.norm(reference))
	return CheckResult("resolvent_oracle", difference <= 1e-2, difference, 1e-2, "relative l2 difference on a 0.5 grid")


def check_boundary_form(count : int = 10) -> CheckResult:
	"""Integration by parts for the single layer at k = i against random smooth ψ"""
	rng = np.random.default_rng(RANDOM_SEED)
	phi_support = (0.5, 2.5)

	def phi(points : np.ndarray) -> np.ndarray:
		t = np.sum(points, axis=-1)
		s = (t - 1.5) / 1.0
		return np.where(np.abs(s) < 1, (1.0 - s ** 2) ** 4, 0.0)

	worst = 0.0
	for _ in range(count):
		center = rng.uniform(0.0, 2.0, size=2)
		radius = rng.uniform(1.0, 2.0, size=2)
		psi, grad_psi = smooth_bump(center, radius)
		psi_box = (max(0.0, center[0] - radius[0]), center[0] + radius[0], max(0.0, center[1] - radius[1]),
			center[1] + radius[1])
		worst = max(worst, resolvent.boundary_form_defect(1.0, phi, phi_support, psi, grad_psi, psi_box))
	return CheckResult("boundary_form", worst <= 1e-4, worst, 1e-4, f"worst relative defect over {count} test functions")


def check_weak_coupling(alphas : typing.Sequence[float] = (1e-2, 5e-3, 2.5e-3)) -> CheckResult:
	"""|f_full - f_weak|/α² stays constant as α → 0"""
	wave = scattering.IncomingWave.from_degrees(1.0, 45.0)
	direction = scattering.direction_from_degrees(60.0)
	ratios = []
	for alpha in alphas:
		pot = step_potential(alpha)
		full = scattering.scattering_amplitude(wave, direction, pot, nystrom.build_grid(pot)).f
		weak = scattering.weak_coupling_amplitude(wave, direction, pot).f
		ratios.append(abs(full - weak) / alpha ** 2)
	spread = (max(ratios) - min(ratios)) / max(ratios)
	return CheckResult("weak_coupling", spread <= 0.25, spread, 0.25, f"ratios {[float(r) for r in ratios]}")


def check_sigma_hat(count : int = 50) -> CheckResult:
	"""Quadrature σ̂ against the step closed form, plus the low-energy constant"""
	rng = np.random.default_rng(RANDOM_SEED)
	pot = step_potential()
	worst = 0.0
	for k, xi in zip(rng.uniform(0.1, 5.0, size=count), rng.uniform(-10.0, 10.0, size=count)):
		worst = max(worst, abs(scattering.sigma_hat(k, xi, pot) - scattering.sigma_hat(k, xi, pot, closed_form=True)))
	constant = scattering.low_energy_constant(pot)
	constant_error = abs(constant - scattering.LOW_ENERGY_REFERENCE) / scattering.LOW_ENERGY_REFERENCE
	return CheckResult("sigma_hat", worst <= 1e-10 and constant_error <= 1e-4, worst, 1e-10,
		f"low-energy constant {constant:.10g} vs 128/pi = {scattering.LOW_ENERGY_REFERENCE:.10g} (the quoted "
		f"four-term sum gives 512/pi)")


def check_positive_axis(samples : int = 200, stability_samples : int = 20) -> CheckResult:
	"""No near-singular 1 + B(k + i0) on [0.1, 10] for the step potential, stable under grid doubling"""
	pot = step_potential()
	scan = spectral.scan_positive_axis(pot, 0.1, 10.0, samples=samples)
	coarse = spectral.scan_positive_axis(pot, 0.1, 10.0, samples=stability_samples)
	fine = spectral.scan_positive_axis(pot, 0.1, 10.0, samples=stability_samples, panels_per_axis=16)
	change = float(np.max(np.abs(coarse.smin - fine.smin) / fine.smin))
	minimum = float(np.min(scan.smin))
	return CheckResult("positive_axis", minimum > 1e-3 and change <= 1e-2, minimum, 1e-3,
		f"min smin {minimum:.4g}, relative change under grid doubling {change:.2e}")


def check_tail_decay(intervals : typing.Sequence[int] = tuple(range(2, 11)), epsilon : float = 1.0) -> CheckResult:
	"""Decay exponent of ‖B(i)·1‖ on [n, n+1] for an exponential potential"""
	pot = BoundaryPotential.exponential(sigma0=1.0, mu=1.0, epsilon=epsilon)
	grid = nystrom.build_grid(pot)
	values = nystrom.apply_B(Wavenumber.imaginary(1.0), grid, pot, np.ones(grid.nodes_total))
	on_first_axis = grid.axes == 0
	norms = []
	for n in intervals:
		mask = on_first_axis & (grid.coordinates >= n) & (grid.coordinates < n + 1)
		norms.append(np.sqrt(np.sum(grid.weights[mask] * np.abs(values[mask]) ** 2)))
	slope = float(np.polyfit(np.log(intervals), np.log(norms), 1)[0])
	threshold = -(1.0 + epsilon) + 0.2
	return CheckResult("tail_decay", slope <= threshold, slope, threshold, "least-squares slope of log norm vs log n")


def check_eigenfunction_residuals(steps : typing.Sequence[float] = (0.1, 0.05, 0.025)) -> CheckResult:
	"""Orders of the interior Helmholtz residual and of the boundary Robin residual of ψ⁺ under stencil halving"""
	pot = step_potential()
	grid = nystrom.build_grid(pot)
	wave = scattering.IncomingWave.from_degrees(1.0, 45.0)
	matrix = nystrom.assemble(wave.wavenumber, grid, pot)
	interior = np.array([[0.7, 1.3], [1.5, 0.6], [2.0, 2.0]])
	boundary_point = np.array([0.5, 0.0])

	interior_residuals, boundary_residuals = [], []
	for h in steps:
		offsets = np.array([[0, 0], [h, 0], [-h, 0], [0, h], [0, -h]])
		stencil = (interior[:, None, :] + offsets[None, :, :]).reshape(-1, 2)
		points = np.concatenate([stencil, [boundary_point, boundary_point + [0.0, h]]])
		psi = scattering.generalized_eigenfunction(wave, pot, grid, points, matrix)
		values = psi[:len(stencil)].reshape(len(interior), 5)
		laplacian = (values[:, 1] + values[:, 2] + values[:, 3] + values[:, 4] - 4 * values[:, 0]) / h ** 2
		interior_residuals.append(float(np.max(np.abs(laplacian + wave.k ** 2 * values[:, 0]))))
		on_boundary, inside = psi[-2], psi[-1]
		boundary_residuals.append(abs((inside - on_boundary) / h + pot.eval(0.5) * on_boundary))

	interior_order = float(np.log(interior_residuals[-2] / interior_residuals[-1]) / np.log(2.0))
	boundary_order = float(np.log(boundary_residuals[-2] / boundary_residuals[-1]) / np.log(2.0))
	return CheckResult("eigenfunction_residuals", interior_order >= 1.8 and boundary_order >= 0.8,
		interior_order, 1.8, f"interior order {interior_order:.3f}, boundary order {boundary_order:.3f} (>= 0.8)")


CHECKS : typing.List[AcceptanceCheck] = [
	AcceptanceCheck("free_case", "alpha = 0 reproduces the free solution", check_free_case),
	AcceptanceCheck("robin_anchor_reduced", "constant sigma: finite-difference eigenvalue -2 on [0, 12]^2",
		check_reduced_robin_anchor),
	AcceptanceCheck("robin_anchor", "constant sigma: finite-difference eigenvalue -2 on [0, 30]^2", check_robin_anchor,
		slow=True),
	AcceptanceCheck("bound_state_oracle", "bound state vs finite differences", check_bound_state_oracle, slow=True),
	AcceptanceCheck("resolvent_oracle", "resolvent vs finite differences", check_resolvent_oracle, slow=True),
	AcceptanceCheck("boundary_form", "integration by parts of the single layer", check_boundary_form, slow=True),
	AcceptanceCheck("weak_coupling", "first-order amplitude error is O(alpha^2)", check_weak_coupling),
	AcceptanceCheck("sigma_hat", "closed form of the step transform", check_sigma_hat),
	AcceptanceCheck("positive_axis", "no embedded eigenvalues on [0.1, 10]", check_positive_axis, slow=True),
	AcceptanceCheck("tail_decay", "kernel tail decay", check_tail_decay),
	AcceptanceCheck("eigenfunction_residuals", "residual orders of the generalized eigenfunction",
		check_eigenfunction_residuals),
]


def check_names() -> typing.List[str]:
	"""Names of all checks in run order"""
	return [check.name for check in CHECKS]


def run_checks(only : typing.Sequence[str] | None = None, skip_slow : bool = False,
		progress : typing.Callable[[CheckResult], None] | None = None) -> typing.List[CheckResult]:
	"""Run the selected checks in order.

	Raises:
		KeyError: a name in `only` is not a known check
	"""
	if only:
		unknown = sorted(set(only) - set(check_names()))
		if unknown:
			raise KeyError(f"Unknown check(s) {unknown}, known checks: {check_names()}")
	results = []
	for check in CHECKS:
		if only and check.name not in only:
			continue
		if skip_slow and check.slow:
			log.info(f"Skipping slow check {check.name}")
			continue
		log.info(f"Running check {check.name}: {check.description}")
		start = time.perf_counter()
		try:
			result = check.run()
		except Exception as exception: #pylint: disable=broad-exception-caught
			log.exception(f"Check {check.name} raised")
			result = CheckResult(check.name, False, float("nan"), float("nan"), f"{type(exception).__name__}: {exception}")
		result.seconds = time.perf_counter() - start
		results.append(result)
		if progress is not None:
			progress(result)
	return results


def format_table(results : typing.Sequence[CheckResult]) -> str:
	"""Plain-text pass/fail table"""
	lines = [f"{'check':<26s} {'result':<6s} {'value':>12s} {'threshold':>12s}  detail"]
	for result in results:
		lines.append(f"{result.name:<26s} {'PASS' if result.passed else 'FAIL':<6s} {result.value:>12.4g} "
			f"{result.threshold:>12.4g}  {result.detail}")
	return "\n".join(lines) + "\n"
