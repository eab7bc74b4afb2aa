"""
Command-line driver: `quarterwave <command> [options]`.

Every command combines the shared option groups (potential, grid, solver, output, runtime) with its own group into a
Configuration, runs the solver and writes CSV or JSON rows. Exit codes: 0 success, 1 invalid input, 2 numerical
failure (including failed verify checks).
"""

import argparse
import logging
import sys
import typing
from dataclasses import dataclass

import numpy as np

import quarterwave
from quarterwave.app import verify
from quarterwave.classes.records import RunManifest, write_rows
from quarterwave.classes.sweep_runner import SweepRunner
from quarterwave.configuration.base_options import BaseOptions
from quarterwave.configuration.configuration import Configuration
from quarterwave.configuration.dataclass_to_argparse import (OptionArgumentParser, add_dataclass_arguments,
                                                             options_from_namespace)
from quarterwave.configuration.options import (AmplitudeOptions, BoundStateOptions, EigenfunctionOptions,
                                               FdEigenOptions, GridOptions, OutputOptions, PotentialOptions,
                                               ResolventOptions, RuntimeOptions, ScanOptions, SolverOptions,
                                               VerifyOptions)
from quarterwave.core import fd_oracle, nystrom, potential, scattering, spectral
from quarterwave.core.exceptions import ConfigurationValidationError, NumericalError, ValidationError
from quarterwave.core.resolvent import Resolvent, SampledField

log = logging.getLogger(__name__)

EXIT_SUCCESS = 0
EXIT_VALIDATION = 1
EXIT_NUMERICAL = 2

Rows = typing.List[typing.Dict[str, typing.Any]]


def initialize_logging(log_level : int | str = logging.WARNING):
	"""Install a single stream handler on the root logger"""
	formatter = logging.Formatter("[{pathname:>60s}:{lineno:<4}]  {levelname:<7s}   {message}", style='{')
	handler = logging.StreamHandler()
	handler.setFormatter(formatter)
	logging.basicConfig(
		handlers=[handler],
		level=log_level) #Without time
	root_logger = logging.getLogger()
	root_logger.setLevel(log_level)


def _check_range(lower : float, upper : float, upper_flag : str):
	if not lower < upper:
		raise ConfigurationValidationError(upper_flag, f"must be larger than the lower end {lower}, got {upper}")


def _check_multiple(box : float, spacing : float, spacing_flag : str):
	ratio = box / spacing
	if abs(ratio - round(ratio)) > 1e-9 * max(1.0, ratio):
		raise ConfigurationValidationError(spacing_flag, f"box {box} must be an integer multiple of the spacing {spacing}")


def _load_potential(config : Configuration) -> potential.BoundaryPotential:
	pot = potential.from_file(config.config)
	log.info(f"Loaded potential {pot.describe()} from {config.config}")
	return pot


def _grid(config : Configuration, pot : potential.BoundaryPotential) -> nystrom.BoundaryGrid:
	nystrom.set_solver_limits(config.condition_limit, config.residual_tolerance)
	return nystrom.build_grid(pot, **config.options["grid"].grid_kwargs()) #type: ignore


FINGERPRINT_EXCLUDED_GROUPS = ("potential", "output", "runtime")


def sweep_fingerprint(config : Configuration, pot : potential.BoundaryPotential) -> typing.Dict[str, typing.Any]:
	"""Everything the results of a checkpointed sweep depend on: the potential document and the numeric option
	groups, without the output and runtime groups"""
	fingerprint : typing.Dict[str, typing.Any] = {"potential": pot.to_config()}
	for group_name, values in config.get_dict().items():
		if group_name not in FINGERPRINT_EXCLUDED_GROUPS:
			fingerprint[group_name] = values
	return fingerprint


#=========== Commands ===========

def run_bound_states(config : Configuration, runner : SweepRunner) -> typing.Tuple[Rows, typing.List[str]]:
	"""bound-states: κ scan and count bisection"""
	_check_range(config.kappa_min, config.kappa_max, "kappa_max")
	pot = _load_potential(config)
	states = spectral.find_bound_states(pot, config.kappa_min, config.kappa_max, samples=config.kappa_samples,
		grid=_grid(config, pot), root_tolerance=config.root_tolerance,
		mapper=runner.mapper("bound-states", sweep_fingerprint(config, pot)))
	return [state.to_row() for state in states], ["kappa", "energy", "smin"]


def _check_angles(config : Configuration):
	for value in config.omega_deg:
		if not 0 <= value <= 90:
			raise ConfigurationValidationError("omega_deg", f"incoming angles must lie in [0, 90], got {value}")
	for value in config.omega_prime_deg:
		if not 0 < value < 90:
			raise ConfigurationValidationError("omega_prime_deg", f"outgoing angles must lie in (0, 90), got {value}")


AMPLITUDE_COLUMNS = ["k", "omega_deg", "omega_prime_deg", "re_f", "im_f", "abs2_f", "method"]


def run_amplitude(config : Configuration, runner : SweepRunner) -> typing.Tuple[Rows, typing.List[str]]:
	"""amplitude: full scattering amplitude on the (k, ω, ω') grid"""
	_check_angles(config)
	pot = _load_potential(config)
	records = scattering.amplitude_sweep(pot, config.k, config.omega_deg, config.omega_prime_deg,
		grid=_grid(config, pot), method=scattering.AmplitudeMethod.FULL, normalization=config.normalization,
		mapper=runner.mapper("amplitude", sweep_fingerprint(config, pot)))
	return [record.to_row() for record in records], AMPLITUDE_COLUMNS


def run_weak_coupling(config : Configuration, runner : SweepRunner) -> typing.Tuple[Rows, typing.List[str]]:
	"""weak-coupling: first-order amplitude on the (k, ω, ω') grid"""
	_check_angles(config)
	pot = _load_potential(config)
	records = scattering.amplitude_sweep(pot, config.k, config.omega_deg, config.omega_prime_deg,
		method=scattering.AmplitudeMethod.WEAK_COUPLING, normalization=config.normalization,
		mapper=runner.mapper("weak-coupling", sweep_fingerprint(config, pot)))
	if pot.shape == "step" and pot.sigma0 != 0:
		scattering.low_energy_constant(pot, normalization=config.normalization)
	return [record.to_row() for record in records], AMPLITUDE_COLUMNS


def run_eigenfunction(config : Configuration, _runner : SweepRunner) -> typing.Tuple[Rows, typing.List[str]]:
	"""eigenfunction: ψ⁺ sampled on [0, box]²"""
	_check_multiple(config.box, config.spacing, "spacing")
	pot = _load_potential(config)
	grid = _grid(config, pot)
	wave = scattering.IncomingWave.from_degrees(config.wavenumber, config.incoming_deg)
	matrix = nystrom.assemble(wave.wavenumber, grid, pot) if pot.sup_abs() > 0 else None
	psi = SampledField.from_function(
		lambda points: scattering.generalized_eigenfunction(wave, pot, grid, points, matrix),
		X=config.box, h=config.spacing, keep_source=False)
	points = psi.points
	values = psi.values.ravel()
	rows = [{"x1": float(point[0]), "x2": float(point[1]), "re_psi": float(value.real), "im_psi": float(value.imag)}
		for point, value in zip(points, values)]
	return rows, ["x1", "x2", "re_psi", "im_psi"]


def run_resolvent(config : Configuration, _runner : SweepRunner) -> typing.Tuple[Rows, typing.List[str]]:
	"""resolvent: R(z)f for a SampledField f read from disk"""
	z = complex(config.z_re, config.z_im)
	if z.imag == 0 and z.real >= 0:
		raise ConfigurationValidationError("z_re", f"z={z} lies on the spectrum [0, inf), give z_re < 0 or z_im != 0")
	if config.field_out is not None and config.stride != 1:
		raise ConfigurationValidationError("field_out", "writing the resulting field needs --stride 1")
	f = SampledField.read_csv(config.field_path)
	pot = _load_potential(config)
	axis_x, axis_y = f.axis_x[::config.stride], f.axis_y[::config.stride]
	x1, x2 = np.meshgrid(axis_x, axis_y, indexing="ij")
	points = np.stack([x1.ravel(), x2.ravel()], axis=-1)
	values = np.atleast_1d(Resolvent(z, pot, grid=_grid(config, pot)).apply(f, points))
	if config.field_out is not None:
		SampledField(X=f.X, h=f.h, values=values.reshape(len(axis_x), len(axis_y))).write_csv(config.field_out)
		log.info(f"Wrote R(z)f to {config.field_out}")
	rows = [{"x1": float(point[0]), "x2": float(point[1]), "re_u": float(value.real), "im_u": float(value.imag)}
		for point, value in zip(points, values)]
	return rows, ["x1", "x2", "re_u", "im_u"]


def run_scan(config : Configuration, runner : SweepRunner) -> typing.Tuple[Rows, typing.List[str]]:
	"""scan: smin(1 + B(k + i0)) on the positive axis"""
	_check_range(config.k_min, config.k_max, "k_max")
	pot = _load_potential(config)
	scan = spectral.scan_positive_axis(pot, config.k_min, config.k_max, samples=config.k_samples,
		grid=_grid(config, pot), flag_ratio=config.flag_ratio,
		mapper=runner.mapper("scan", sweep_fingerprint(config, pot)))
	return scan.to_rows(), ["k", "smin", "flagged"]


def run_fd_eigen(config : Configuration, _runner : SweepRunner) -> typing.Tuple[Rows, typing.List[str]]:
	"""fd-eigen: lowest eigenvalues of the finite-difference oracle"""
	_check_multiple(config.box_size, config.step, "step")
	pot = _load_potential(config)
	values = fd_oracle.lowest_eigenvalues(fd_oracle.assemble_fd(pot, config.box_size, config.step), config.count)
	columns = ["index", "h", "eigenvalue"]
	rows : Rows = [{"index": i, "h": config.step, "eigenvalue": value} for i, value in enumerate(values)]
	if config.refine:
		fine = fd_oracle.lowest_eigenvalues(fd_oracle.assemble_fd(pot, config.box_size, config.step / 2),
			config.count)
		for row, fine_value in zip(rows, fine):
			row["eigenvalue_half_step"] = fine_value
			row["extrapolated"] = fd_oracle.richardson_extrapolate([row["eigenvalue"], fine_value])
		columns += ["eigenvalue_half_step", "extrapolated"]
	return rows, columns


@dataclass
class Command():
	"""A subcommand: its option groups and its handler"""
	name : str
	help : str
	groups : typing.Dict[str, typing.Type[BaseOptions]]
	handler : typing.Callable[[Configuration, SweepRunner], typing.Tuple[Rows, typing.List[str]]] | None


def _solver_groups(command_group : typing.Type[BaseOptions]) -> typing.Dict[str, typing.Type[BaseOptions]]:
	return {"potential": PotentialOptions, "grid": GridOptions, "solver": SolverOptions, "output": OutputOptions,
		"runtime": RuntimeOptions, "command": command_group}


COMMANDS : typing.Dict[str, Command] = {command.name: command for command in [
	Command("bound-states", "Find the bound states -kappa^2 in a kappa range", _solver_groups(BoundStateOptions),
		run_bound_states),
	Command("amplitude", "Scattering amplitude on a grid of k and directions", _solver_groups(AmplitudeOptions),
		run_amplitude),
	Command("eigenfunction", "Sample the generalized eigenfunction psi+ on a box",
		_solver_groups(EigenfunctionOptions), run_eigenfunction),
	Command("resolvent", "Apply the resolvent to a sampled field", _solver_groups(ResolventOptions), run_resolvent),
	Command("scan", "Smallest singular value of 1+B(k+i0) on the positive axis", _solver_groups(ScanOptions),
		run_scan),
	Command("weak-coupling", "First-order scattering amplitude", {"potential": PotentialOptions,
		"output": OutputOptions, "runtime": RuntimeOptions, "command": AmplitudeOptions}, run_weak_coupling),
	Command("fd-eigen", "Lowest eigenvalues of the finite-difference oracle", {"potential": PotentialOptions,
		"output": OutputOptions, "runtime": RuntimeOptions, "command": FdEigenOptions}, run_fd_eigen),
	Command("verify", "Run the acceptance checks and print a pass/fail table", {"output": OutputOptions,
		"runtime": RuntimeOptions, "command": VerifyOptions}, None),
]}


def build_parser() -> OptionArgumentParser:
	"""The argument parser with one sub-parser per command"""
	parser = OptionArgumentParser(prog="quarterwave", description="Quarter-plane Robin two-body solver")
	parser.add_argument("--version", action="version", version=f"%(prog)s {quarterwave.__version__}")
	subparsers = parser.add_subparsers(dest="command", required=True, metavar="command")
	for command in COMMANDS.values():
		subparser = subparsers.add_parser(command.name, help=command.help, description=command.help)
		for group_name, options_type in command.groups.items():
			add_dataclass_arguments(subparser, options_type, title=group_name)
	return parser


def configuration_from_namespace(namespace : argparse.Namespace) -> Configuration:
	"""Validated Configuration of the parsed command"""
	command = COMMANDS[namespace.command]
	config = Configuration.get_configuration_from_passed_options({
		group_name: options_from_namespace(namespace, options_type)
		for group_name, options_type in command.groups.items()
	})
	config.validate()
	return config


def _run_verify(config : Configuration, stdout : typing.TextIO) -> int:
	results = verify.run_checks(only=config.only, skip_slow=config.skip_slow,
		progress=lambda result: log.info(f"{result.name}: {'PASS' if result.passed else 'FAIL'}"))
	if config.out is None and config.format == "csv":
		stdout.write(verify.format_table(results))
	else:
		write_rows([result.to_row() for result in results], config.out, config.format, command="verify",
			stream=stdout)
	failed = [result.name for result in results if not result.passed]
	if failed:
		log.error(f"Failed checks: {failed}")
		return EXIT_NUMERICAL
	return EXIT_SUCCESS


def execute(config : Configuration, command_name : str, stdout : typing.TextIO) -> int:
	"""Run a validated configuration"""
	manifest = RunManifest(command=command_name, potential_config=config.get("config", None),
		parameters=config.flat_dict(), output=config.out, format=config.format, version=quarterwave.__version__)
	manifest.validate()
	if command_name == "verify":
		return _run_verify(config, stdout)

	runner = SweepRunner(n_threads=config.threads, checkpoint_path=config.checkpoint)
	runner.taskFinished.connect(lambda label, done, total: log.info(f"{label}: {done}/{total} task(s) done"))
	runner.sweepFinished.connect(lambda label, total: log.debug(f"{label}: sweep of {total} task(s) finished"))
	rows, columns = COMMANDS[command_name].handler(config, runner) #type: ignore
	write_rows(rows, config.out, config.format, command=command_name, columns=columns, stream=stdout)
	if config.manifest:
		path = manifest.write()
		if path is not None:
			log.info(f"Wrote run manifest to {path}")
	return EXIT_SUCCESS


def run(argv : typing.Sequence[str] | None = None, stdout : typing.TextIO | None = None) -> int:
	"""Parse argv, run the command and return the exit code"""
	stdout = stdout if stdout is not None else sys.stdout
	try:
		namespace = build_parser().parse_args(argv)
		config = configuration_from_namespace(namespace)
		initialize_logging(config.log_level)
		return execute(config, namespace.command, stdout)
	except ValidationError as exception:
		log.error(str(exception))
		print(f"quarterwave: error: {exception}", file=sys.stderr)
		return EXIT_VALIDATION
	except (OSError, KeyError) as exception:
		log.error(str(exception))
		print(f"quarterwave: error: {exception}", file=sys.stderr)
		return EXIT_VALIDATION
	except NumericalError as exception:
		log.error(str(exception))
		print(f"quarterwave: numerical error: {exception}", file=sys.stderr)
		return EXIT_NUMERICAL


def main():
	"""Console-script entry point"""
	sys.exit(run())


if __name__ == "__main__":
	main()
