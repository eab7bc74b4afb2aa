"""
The boundary potential σ living on both half-line boundaries of the quarter plane, scaled by a coupling α.

Three shapes are supported: a step (σ0 on [0, L]), an exponential (σ0·e^{-μx}) and a table of samples that
is linearly interpolated. Potentials are immutable and can be read from / written to JSON documents:

	{"shape": "step", "sigma0": 1.0, "L": 1.0, "alpha": 0.01}
	{"shape": "exponential", "sigma0": 1.0, "mu": 2.0}
	{"shape": "table", "points": [[0, 1], [1, 0.5], [2, 0]], "alpha": 1, "epsilon": 1}
"""

import json
import logging
import math
import os
import typing
from dataclasses import dataclass, field, replace

import numpy as np

from quarterwave.core.exceptions import DomainError, PotentialConfigError

log = logging.getLogger(__name__)

SHAPES = ("step", "exponential", "table")
SHAPE_FIELDS : typing.Dict[str, typing.Tuple[str, ...]] = { #Required fields per shape
	"step": ("sigma0", "L"),
	"exponential": ("sigma0", "mu"),
	"table": ("points",)
}
COMMON_FIELDS = ("shape", "alpha", "epsilon")


@dataclass(frozen=True)
class BoundaryPotential():
	"""
	Boundary potential σ_α(x) = α·σ(x), x >= 0, identical on the horizontal and the vertical half-line.

	Use the `step`, `exponential` and `table` constructors (or `from_config`) rather than the raw constructor.
	"""
	shape : str
	sigma0 : float = 0.0
	L : float | None = None #pylint: disable=invalid-name
	mu : float | None = None
	points : typing.Tuple[typing.Tuple[float, float], ...] | None = None
	alpha : float = 1.0
	epsilon : float = 1.0 #Declared decay σ(x) = O(x^{-1-ε})
	decay_constant : float = field(init=False, compare=False, default=0.0)

	def __post_init__(self):
		_validate_fields(self)
		object.__setattr__(self, "decay_constant", self._compute_decay_constant())

	@classmethod
	def step(cls, sigma0 : float, L : float, alpha : float = 1.0, epsilon : float = 1.0) -> 'BoundaryPotential': #pylint: disable=invalid-name
		"""σ = sigma0 on [0, L] and 0 beyond"""
		return cls(shape="step", sigma0=float(sigma0), L=float(L), alpha=float(alpha), epsilon=float(epsilon))

	@classmethod
	def exponential(cls, sigma0 : float, mu : float, alpha : float = 1.0, epsilon : float = 1.0
			) -> 'BoundaryPotential':
		"""σ = sigma0·exp(-mu·x)"""
		return cls(shape="exponential", sigma0=float(sigma0), mu=float(mu), alpha=float(alpha),
			epsilon=float(epsilon))

	@classmethod
	def table(cls, points : typing.Iterable[typing.Sequence[float]], alpha : float = 1.0, epsilon : float = 1.0
			) -> 'BoundaryPotential':
		"""Linear interpolation of (x_i, σ_i) samples, 0 beyond the last abscissa"""
		frozen_points = tuple((float(x), float(s)) for x, s in points)
		return cls(shape="table", points=frozen_points, alpha=float(alpha), epsilon=float(epsilon))

	def with_alpha(self, alpha : float) -> 'BoundaryPotential':
		"""Same profile with another coupling"""
		return replace(self, alpha=float(alpha))

	def _compute_decay_constant(self) -> float:
		"""sup over samples of |σ(x)|·max(x,1)^{1+ε}, recorded so the declared decay can be checked"""
		if self.shape == "table":
			xs, sigmas = self.table_arrays()
			return float(np.max(np.abs(sigmas) * np.maximum(xs, 1.0) ** (1.0 + self.epsilon)))
		if self.shape == "step":
			return abs(self.sigma0) * max(self.L, 1.0) ** (1.0 + self.epsilon) #type: ignore
		samples = np.linspace(0.0, 60.0 / self.mu, 2001) #type: ignore
		return float(np.max(abs(self.sigma0) * np.exp(-self.mu * samples) \
			* np.maximum(samples, 1.0) ** (1.0 + self.epsilon)))

	def table_arrays(self) -> typing.Tuple[np.ndarray, np.ndarray]:
		"""(abscissae, values) of a table potential as arrays, without the coupling"""
		assert self.points is not None, "table_arrays called on a non-table potential"
		arr = np.asarray(self.points, dtype=float)
		return arr[:, 0], arr[:, 1]

	def profile(self, x : np.ndarray) -> np.ndarray:
		"""σ(x) without the coupling α"""
		if self.shape == "step":
			return np.where(x <= self.L, self.sigma0, 0.0) #type: ignore
		if self.shape == "exponential":
			return self.sigma0 * np.exp(-self.mu * x) #type: ignore
		xs, sigmas = self.table_arrays()
		return np.interp(x, xs, sigmas, left=sigmas[0], right=0.0)

	def eval(self, x : typing.Union[float, np.ndarray]) -> typing.Union[float, np.ndarray]:
		"""α·σ(x).

		Args:
			x (float | np.ndarray): boundary coordinate(s), x >= 0

		Raises:
			DomainError: if any x < 0

		Returns:
			float | np.ndarray: the scaled potential, same shape as x
		"""
		x_arr = np.asarray(x, dtype=float)
		if np.any(x_arr < 0):
			raise DomainError(f"Potential evaluated at negative coordinate {float(np.min(x_arr))}")
		if self.alpha == 0:
			values = np.zeros_like(x_arr)
		else:
			values = self.alpha * self.profile(x_arr)
		if np.ndim(x) == 0:
			return float(values)
		return values

	__call__ = eval

	def sqrt_abs(self, x : np.ndarray) -> np.ndarray:
		"""√|σ_α(x)|"""
		return np.sqrt(np.abs(self.eval(np.asarray(x, dtype=float))))

	def signed_sqrt(self, x : np.ndarray) -> np.ndarray:
		"""sgn(σ_α(x))·√|σ_α(x)| with sgn(0) = 0"""
		values = np.asarray(self.eval(np.asarray(x, dtype=float)))
		return np.sign(values) * np.sqrt(np.abs(values))

	def sup_abs(self) -> float:
		"""sup_x |σ_α(x)|"""
		if self.shape == "table":
			return abs(self.alpha) * float(np.max(np.abs(self.table_arrays()[1])))
		return abs(self.alpha * self.sigma0)

	def changes_sign(self) -> bool:
		"""True when σ takes both signs on the boundary (only table profiles can)"""
		if self.shape != "table" or self.alpha == 0:
			return False
		sigmas = self.table_arrays()[1]
		return bool(np.min(sigmas) < 0 < np.max(sigmas))

	def support_radius(self, threshold : float) -> float:
		"""Smallest X with |α·σ(x)| < threshold for every x > X.

		Args:
			threshold (float): positive cut-off

		Returns:
			float: the truncation radius (0 for a vanishing potential)
		"""
		if threshold <= 0:
			raise DomainError(f"support_radius threshold must be positive, got {threshold}")
		if self.alpha == 0 or self.sup_abs() == 0:
			return 0.0
		if self.shape == "step":
			return float(self.L) if abs(self.alpha * self.sigma0) >= threshold else 0.0 #type: ignore
		if self.shape == "exponential":
			amplitude = abs(self.alpha * self.sigma0)
			return max(0.0, math.log(amplitude / threshold) / self.mu) if amplitude >= threshold else 0.0 #type: ignore

		xs, sigmas = self.table_arrays()
		values = self.alpha * sigmas
		above = np.nonzero(np.abs(values) >= threshold)[0]
		if len(above) == 0:
			return 0.0
		i = int(above[-1])
		if i == len(xs) - 1:
			return float(xs[i])
		#|v| crosses the threshold inside [x_i, x_{i+1}] where v is linear
		target = math.copysign(threshold, values[i])
		fraction = (target - values[i]) / (values[i + 1] - values[i])
		return float(xs[i] + fraction * (xs[i + 1] - xs[i]))

	def breakpoints(self) -> typing.List[float]:
		"""Points where σ is discontinuous (panel boundaries must fall on them)"""
		if self.shape == "step" and self.alpha != 0:
			return [float(self.L)] #type: ignore
		return []

	def to_config(self) -> typing.Dict[str, typing.Any]:
		"""Inverse of from_config"""
		document : typing.Dict[str, typing.Any] = {"shape": self.shape}
		if self.shape == "step":
			document.update(sigma0=self.sigma0, L=self.L)
		elif self.shape == "exponential":
			document.update(sigma0=self.sigma0, mu=self.mu)
		else:
			document["points"] = [list(point) for point in self.points] #type: ignore
		document.update(alpha=self.alpha, epsilon=self.epsilon)
		return document

	def to_json(self, indent : int | None = 2) -> str:
		"""Serialize to a JSON document"""
		return json.dumps(self.to_config(), indent=indent)

	def describe(self) -> str:
		"""Short one-line description used in logs and CSV manifests"""
		if self.shape == "step":
			return f"step(sigma0={self.sigma0:g}, L={self.L:g}, alpha={self.alpha:g})"
		if self.shape == "exponential":
			return f"exponential(sigma0={self.sigma0:g}, mu={self.mu:g}, alpha={self.alpha:g})"
		return f"table({len(self.points)} points, alpha={self.alpha:g})" #type: ignore


def _is_number(value : typing.Any) -> bool:
	return isinstance(value, (int, float)) and not isinstance(value, bool) and math.isfinite(value)


def _validate_fields(pot : BoundaryPotential):
	if pot.shape not in SHAPES:
		raise PotentialConfigError("shape", f"must be one of {', '.join(SHAPES)}, got '{pot.shape}'")
	if not _is_number(pot.alpha) or pot.alpha < 0:
		raise PotentialConfigError("alpha", "alpha must be a non-negative number")
	if not _is_number(pot.epsilon) or pot.epsilon < 0:
		raise PotentialConfigError("epsilon", "epsilon must be a non-negative number")
	if pot.shape in ("step", "exponential") and not _is_number(pot.sigma0):
		raise PotentialConfigError("sigma0", "sigma0 must be a finite number")
	if pot.shape == "step":
		if not _is_number(pot.L) or pot.L <= 0: #type: ignore
			raise PotentialConfigError("L", "L must be positive")
	elif pot.shape == "exponential":
		if not _is_number(pot.mu) or pot.mu <= 0: #type: ignore
			raise PotentialConfigError("mu", "mu must be positive")
	else:
		if pot.points is None or len(pot.points) < 2:
			raise PotentialConfigError("points", "a table needs at least two [x, sigma] pairs")
		xs = [point[0] for point in pot.points]
		if not all(_is_number(x) and _is_number(s) for x, s in pot.points):
			raise PotentialConfigError("points", "all table entries must be finite numbers")
		if xs[0] < 0:
			raise PotentialConfigError("points", "table abscissae must be non-negative")
		if any(b <= a for a, b in zip(xs[:-1], xs[1:])):
			raise PotentialConfigError("points", "table abscissae must be strictly increasing")


def from_config(document : typing.Union[str, typing.Mapping[str, typing.Any]]) -> BoundaryPotential:
	"""Parse a potential document (JSON text or an already decoded mapping).

	Args:
		document (str | typing.Mapping): the document

	Raises:
		PotentialConfigError: malformed JSON, unknown or missing fields, values violating their constraints.
			The error names the offending field.

	Returns:
		BoundaryPotential: the validated potential
	"""
	if isinstance(document, str):
		try:
			document = json.loads(document)
		except json.JSONDecodeError as exception:
			raise PotentialConfigError("document", f"not valid JSON ({exception.msg} at line {exception.lineno})"
				) from exception
	if not isinstance(document, typing.Mapping):
		raise PotentialConfigError("document", "top level must be an object")

	shape = document.get("shape", None)
	if shape is None:
		raise PotentialConfigError("shape", "missing required field")
	if shape not in SHAPES:
		raise PotentialConfigError("shape", f"must be one of {', '.join(SHAPES)}, got '{shape}'")

	allowed = set(COMMON_FIELDS) | set(SHAPE_FIELDS[shape])
	for key in document:
		if key not in allowed:
			raise PotentialConfigError(str(key), f"unknown field for shape '{shape}'")
	for key in SHAPE_FIELDS[shape]:
		if key not in document:
			raise PotentialConfigError(key, f"missing required field for shape '{shape}'")

	for key in ("sigma0", "L", "mu", "alpha", "epsilon"):
		if key in document and not _is_number(document[key]):
			raise PotentialConfigError(key, f"{key} must be a finite number")

	alpha = document.get("alpha", 1.0)
	epsilon = document.get("epsilon", 1.0)
	if shape == "step":
		return BoundaryPotential.step(document["sigma0"], document["L"], alpha=alpha, epsilon=epsilon)
	if shape == "exponential":
		return BoundaryPotential.exponential(document["sigma0"], document["mu"], alpha=alpha, epsilon=epsilon)

	points = document["points"]
	if not isinstance(points, list) or not all(isinstance(point, (list, tuple)) and len(point) == 2 \
			for point in points):
		raise PotentialConfigError("points", "points must be a list of [x, sigma] pairs")
	if not all(_is_number(x) and _is_number(s) for x, s in points):
		raise PotentialConfigError("points", "all table entries must be finite numbers")
	return BoundaryPotential.table(points, alpha=alpha, epsilon=epsilon)


def from_file(path : str) -> BoundaryPotential:
	"""Read a potential document from disk"""
	if not os.path.exists(path):
		raise PotentialConfigError("config", f"potential file {path} does not exist")
	with open(path, "r", encoding="utf-8") as config_file:
		return from_config(config_file.read())
