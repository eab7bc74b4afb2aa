"""
Option groups of the quarterwave command line. Shared groups (potential, grid, solver, output, runtime) are
combined with one command group per subcommand into a Configuration.
"""
import typing
from dataclasses import dataclass, field

from pyside6_utils.classes.constraints import Interval, StrOptions

from quarterwave.configuration.base_options import BaseOptions

POSITIVE_FLOAT = Interval(float, 0, None, closed='neither')


@dataclass
class PotentialOptions(BaseOptions):
	"""Where the boundary potential is read from"""
	config : str = field(
		default="",
		metadata=dict(
			display_name="Potential document",
			help="Path to the JSON document describing the boundary potential",
			constraints=[str],
			required=True
		)
	)


@dataclass
class GridOptions(BaseOptions):
	"""Nyström boundary grid"""
	panels_per_axis : int = field(
		default=8,
		metadata=dict(
			display_name="Panels per axis",
			help="Number of panels on each half-line (including the graded ones)",
			constraints=[Interval(int, 1, None, closed='both')]
		)
	)
	nodes_per_panel : int = field(
		default=16,
		metadata=dict(
			display_name="Nodes per panel",
			help="Gauss-Legendre order on each panel",
			constraints=[Interval(int, 2, 64, closed='both')]
		)
	)
	truncation_threshold : float | None = field(
		default=None,
		metadata=dict(
			display_name="Truncation threshold",
			help="The half-line is cut where |sigma| stays below this value (default 1e-10 sup|sigma|)",
			constraints=[POSITIVE_FLOAT, None]
		)
	)
	grading_levels : int | None = field(
		default=None,
		metadata=dict(
			display_name="Grading levels",
			help="Number of geometrically graded panels toward the corner (default panels_per_axis // 2)",
			constraints=[Interval(int, 0, None, closed='both'), None]
		)
	)

	def grid_kwargs(self) -> typing.Dict[str, typing.Any]:
		"""Keyword arguments of build_grid"""
		return dict(panels_per_axis=self.panels_per_axis, nodes_per_panel=self.nodes_per_panel,
			truncation_threshold=self.truncation_threshold, grading_levels=self.grading_levels)


@dataclass
class SolverOptions(BaseOptions):
	"""Tolerances of the linear solves and the spectral searches"""
	condition_limit : float = field(
		default=1e12,
		metadata=dict(
			display_name="Condition limit",
			help="Solves of 1+B(k) with a larger condition estimate are rejected as near-singular",
			constraints=[Interval(float, 1, None, closed='both')]
		)
	)
	residual_tolerance : float = field(
		default=1e-10,
		metadata=dict(
			display_name="Residual tolerance",
			help="Relative residual required from every linear solve",
			constraints=[Interval(float, 0, 1, closed='neither')]
		)
	)
	root_tolerance : float = field(
		default=1e-8,
		metadata=dict(
			display_name="Root tolerance",
			help="Bound-state bisection stops at this bracket width in kappa",
			constraints=[POSITIVE_FLOAT]
		)
	)
	flag_ratio : float = field(
		default=1e-6,
		metadata=dict(
			display_name="Flag ratio",
			help="Positive-axis samples with smin below flag_ratio * median(smin) are flagged",
			constraints=[Interval(float, 0, 1, closed='neither')]
		)
	)


@dataclass
class OutputOptions(BaseOptions):
	"""Where and how results are written"""
	out : str | None = field(
		default=None,
		metadata=dict(
			display_name="Output path",
			help="Output file, standard output when omitted",
			constraints=[str, None]
		)
	)
	format : str = field(
		default="csv",
		metadata=dict(
			display_name="Output format",
			help="csv (one row per record, complex values as re_/im_ columns) or json",
			constraints=[StrOptions({"csv", "json"})]
		)
	)
	manifest : bool = field(
		default=False,
		metadata=dict(
			display_name="Write manifest",
			help="Write a JSON run manifest next to the output file",
			constraints=[bool]
		)
	)


@dataclass
class RuntimeOptions(BaseOptions):
	"""Parallelism, checkpointing and logging"""
	threads : int | None = field(
		default=None,
		metadata=dict(
			display_name="Threads",
			help="Worker threads of parameter sweeps (default QUARTERWAVE_THREADS or the CPU count)",
			constraints=[Interval(int, 1, None, closed='both'), None]
		)
	)
	checkpoint : str | None = field(
		default=None,
		metadata=dict(
			display_name="Checkpoint",
			help="File in which finished sweep tasks are stored, a rerun resumes from it",
			constraints=[str, None]
		)
	)
	log_level : str = field(
		default="WARNING",
		metadata=dict(
			display_name="Log level",
			help="Logging level of the root logger",
			constraints=[StrOptions({"DEBUG", "INFO", "WARNING", "ERROR"})]
		)
	)


@dataclass
class BoundStateOptions(BaseOptions):
	"""bound-states: κ range of the search"""
	kappa_min : float = field(
		default=0.01,
		metadata=dict(display_name="Minimal kappa", help="Lower end of the kappa range (> 0)",
			constraints=[POSITIVE_FLOAT])
	)
	kappa_max : float = field(
		default=3.0,
		metadata=dict(display_name="Maximal kappa", help="Upper end of the kappa range",
			constraints=[POSITIVE_FLOAT])
	)
	kappa_samples : int = field(
		default=64,
		metadata=dict(display_name="Kappa samples", help="Size of the initial kappa grid",
			constraints=[Interval(int, 2, None, closed='both')])
	)


@dataclass
class AmplitudeOptions(BaseOptions):
	"""amplitude / weak-coupling: the (k, ω, ω') grid"""
	k : typing.List[float] = field(
		default_factory=lambda: [1.0],
		metadata=dict(display_name="Wavenumbers", help="One or more wavenumbers k > 0",
			constraints=[POSITIVE_FLOAT], elementwise=True)
	)
	omega_deg : typing.List[float] = field(
		default_factory=lambda: [45.0],
		metadata=dict(display_name="Incoming angles", help="Incoming directions in degrees",
			constraints=[float], elementwise=True)
	)
	omega_prime_deg : typing.List[float] = field(
		default_factory=lambda: [60.0],
		metadata=dict(display_name="Outgoing angles", help="Outgoing directions in degrees (off the axes)",
			constraints=[float], elementwise=True)
	)
	normalization : str = field(
		default="far_field",
		metadata=dict(display_name="Normalization",
			help="far_field (coefficient of the outgoing wave) or displayed (quoted closed-form prefactor)",
			constraints=[StrOptions({"far_field", "displayed"})])
	)


@dataclass
class EigenfunctionOptions(BaseOptions):
	"""eigenfunction: incoming wave and sampling box"""
	wavenumber : float = field(
		default=1.0,
		metadata=dict(display_name="Wavenumber", help="Wavenumber k > 0 of the incoming wave",
			constraints=[POSITIVE_FLOAT])
	)
	incoming_deg : float = field(
		default=45.0,
		metadata=dict(display_name="Incoming angle", help="Incoming direction in degrees", constraints=[float])
	)
	box : float = field(
		default=4.0,
		metadata=dict(display_name="Box size", help="psi+ is sampled on [0, box]^2", constraints=[POSITIVE_FLOAT])
	)
	spacing : float = field(
		default=0.25,
		metadata=dict(display_name="Spacing", help="Sample spacing (box must be a multiple of it)",
			constraints=[POSITIVE_FLOAT])
	)


@dataclass
class ResolventOptions(BaseOptions):
	"""resolvent: spectral parameter and input field"""
	field_path : str = field(
		default="",
		metadata=dict(display_name="Field", help="SampledField CSV holding f", constraints=[str], required=True,
			metavar="PATH")
	)
	z_re : float = field(
		default=-1.0,
		metadata=dict(display_name="Re z", help="Real part of the spectral parameter", constraints=[float])
	)
	z_im : float = field(
		default=0.0,
		metadata=dict(display_name="Im z", help="Imaginary part of the spectral parameter", constraints=[float])
	)
	stride : int = field(
		default=1,
		metadata=dict(display_name="Stride", help="Evaluate R(z)f on every stride-th sample of the field grid",
			constraints=[Interval(int, 1, None, closed='both')])
	)
	field_out : str | None = field(
		default=None,
		metadata=dict(display_name="Field output", help="Also write R(z)f as a SampledField CSV (needs stride 1)",
			constraints=[str, None])
	)


@dataclass
class ScanOptions(BaseOptions):
	"""scan: positive-axis sampling"""
	k_min : float = field(
		default=0.1,
		metadata=dict(display_name="Minimal k", help="Lower end of the scan", constraints=[POSITIVE_FLOAT])
	)
	k_max : float = field(
		default=10.0,
		metadata=dict(display_name="Maximal k", help="Upper end of the scan", constraints=[POSITIVE_FLOAT])
	)
	k_samples : int = field(
		default=200,
		metadata=dict(display_name="Samples", help="Number of k samples",
			constraints=[Interval(int, 2, None, closed='both')])
	)


@dataclass
class FdEigenOptions(BaseOptions):
	"""fd-eigen: finite-difference oracle"""
	box_size : float = field(
		default=40.0,
		metadata=dict(display_name="Box size", help="Truncation length X of the finite-difference box",
			constraints=[POSITIVE_FLOAT])
	)
	step : float = field(
		default=0.05,
		metadata=dict(display_name="Step", help="Grid step h (X/h must be an integer)", constraints=[POSITIVE_FLOAT])
	)
	count : int = field(
		default=1,
		metadata=dict(display_name="Count", help="Number of lowest eigenvalues",
			constraints=[Interval(int, 1, None, closed='both')])
	)
	refine : bool = field(
		default=False,
		metadata=dict(display_name="Refine", help="Also solve with h/2 and report the Richardson extrapolation",
			constraints=[bool])
	)


@dataclass
class VerifyOptions(BaseOptions):
	"""verify: which acceptance checks to run"""
	only : typing.List[str] = field(
		default_factory=list,
		metadata=dict(display_name="Only", help="Run only the named checks", constraints=[str], elementwise=True)
	)
	skip_slow : bool = field(
		default=False,
		metadata=dict(display_name="Skip slow", help="Skip the checks marked slow", constraints=[bool])
	)
