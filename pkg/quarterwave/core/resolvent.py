"""
Action of the resolvent (-Δ_σ - z)^{-1} of the Robin Laplacian on sampled functions of compact support,

	R(z)f = R₀(z)f + single layer of sgn(σ)√|σ|·g,    (1 + B(k))g = √|σ|·(R₀(z)f on the boundary),   k = √z,

where R₀(z) is the resolvent of the Neumann Laplacian (the four-image Green function). Area integrals against the
log-singular kernel are split at the evaluation point into rectangles, each cut into two triangles and mapped with
the Duffy transform so that the Jacobian cancels the singularity.
"""

import logging
import os
import typing
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.interpolate

from quarterwave.core.exceptions import DomainError, QuarterwaveWarning, ValidationError
from quarterwave.core.kernels import (PointLike, Wavenumber, as_points, green_images, green_images_gradient)
from quarterwave.core.nystrom import BoundaryGrid, KernelMatrix, assemble, build_grid, layer_potential
from quarterwave.core.potential import BoundaryPotential

log = logging.getLogger(__name__)

DEFAULT_QUADRATURE_ORDER = 20
NEAR_FRACTION = 0.25 #Points closer to the support box than this fraction of its diagonal use the Duffy split

Box = typing.Tuple[float, float, float, float] #(x1_min, x1_max, x2_min, x2_max)


@dataclass(eq=False)
class SampledField():
	"""
	A complex function on the box [0, X]² given by its samples values[i, j] = f(i·h, j·h).

	If `source` is set (see from_function) it is used wherever the field is evaluated off the sample grid, the
	samples then only serve to locate the support and for output. Otherwise the samples are interpolated with
	bicubic splines (real and imaginary part separately).
	"""
	X : float #pylint: disable=invalid-name
	h : float
	values : np.ndarray
	source : typing.Callable[[np.ndarray], np.ndarray] | None = field(default=None, compare=False, repr=False)

	_spline : typing.Tuple[typing.Any, typing.Any] | None = field(default=None, init=False, compare=False, repr=False)

	def __post_init__(self):
		self.values = np.asarray(self.values, dtype=complex)
		if self.h <= 0:
			raise ValidationError(f"Sample spacing h must be positive, got {self.h}")
		if self.values.ndim != 2:
			raise ValidationError(f"Field values must be a 2D array, got shape {self.values.shape}")
		if not np.all(np.isfinite(self.values)):
			raise ValidationError("Field values must be finite")
		if (max(self.values.shape) - 1) * self.h > self.X * (1 + 1e-9):
			raise ValidationError(f"{self.values.shape} samples with spacing {self.h} do not fit in [0, {self.X}]^2")

	@classmethod
	def from_function(cls, func : typing.Callable[[np.ndarray], np.ndarray], X : float, h : float, #pylint: disable=invalid-name
			keep_source : bool = True
		) -> 'SampledField':
		"""Sample func (points of shape (m, 2) -> values (m,)) on [0, X]² with spacing h.

		Raises:
			ValidationError: X is not an integer multiple of h
		"""
		count = _sample_count(X, h)
		axis = np.arange(count) * h
		x1, x2 = np.meshgrid(axis, axis, indexing="ij")
		values = np.asarray(func(np.stack([x1.ravel(), x2.ravel()], axis=-1)), dtype=complex).reshape(count, count)
		return cls(X=float(X), h=float(h), values=values, source=func if keep_source else None)

	@classmethod
	def zeros(cls, X : float, h : float) -> 'SampledField': #pylint: disable=invalid-name
		"""The zero field"""
		count = _sample_count(X, h)
		return cls(X=float(X), h=float(h), values=np.zeros((count, count), dtype=complex))

	@property
	def nx(self) -> int:
		"""Samples along x1"""
		return self.values.shape[0]

	@property
	def ny(self) -> int:
		"""Samples along x2"""
		return self.values.shape[1]

	@property
	def axis_x(self) -> np.ndarray:
		"""Sample abscissae along x1"""
		return np.arange(self.nx) * self.h

	@property
	def axis_y(self) -> np.ndarray:
		"""Sample abscissae along x2"""
		return np.arange(self.ny) * self.h

	@property
	def points(self) -> np.ndarray:
		"""All sample points, row-major, shape (nx·ny, 2)"""
		x1, x2 = np.meshgrid(self.axis_x, self.axis_y, indexing="ij")
		return np.stack([x1.ravel(), x2.ravel()], axis=-1)

	def is_zero(self) -> bool:
		"""True when every sample vanishes"""
		return not np.any(self.values)

	def support_box(self) -> Box | None:
		"""Bounding box of the nonzero samples widened by one spacing (clipped to the field box), None for f = 0"""
		rows, cols = np.nonzero(self.values)
		if len(rows) == 0:
			return None
		return (max(0.0, (rows.min() - 1) * self.h), min(self.X, (rows.max() + 1) * self.h),
			max(0.0, (cols.min() - 1) * self.h), min(self.X, (cols.max() + 1) * self.h))

	def interpolant(self) -> typing.Callable[[np.ndarray], np.ndarray]:
		"""Bicubic spline interpolant of the samples, zero outside the sample box"""
		if self._spline is None:
			degree_x, degree_y = min(3, self.nx - 1), min(3, self.ny - 1)
			self._spline = (
				scipy.interpolate.RectBivariateSpline(self.axis_x, self.axis_y, self.values.real, kx=degree_x, ky=degree_y),
				scipy.interpolate.RectBivariateSpline(self.axis_x, self.axis_y, self.values.imag, kx=degree_x, ky=degree_y)
			)
		real_part, imag_part = self._spline

		def evaluate(points : np.ndarray) -> np.ndarray:
			pts = np.atleast_2d(np.asarray(points, dtype=float))
			inside = (pts[:, 0] <= self.axis_x[-1]) & (pts[:, 1] <= self.axis_y[-1]) & np.all(pts >= 0, axis=1)
			result = np.zeros(len(pts), dtype=complex)
			result[inside] = real_part.ev(pts[inside, 0], pts[inside, 1]) \
				+ 1j * imag_part.ev(pts[inside, 0], pts[inside, 1])
			return result
		return evaluate

	def evaluate(self, points : np.ndarray) -> np.ndarray:
		"""f at arbitrary points of shape (m, 2)"""
		if self.source is not None:
			return np.asarray(self.source(np.atleast_2d(points)), dtype=complex)
		return self.interpolant()(points)

	def inner_product(self, other : 'SampledField') -> complex:
		"""⟨self, other⟩ = Σ conj(self)·other·h² (trapezoid weights on the common sample grid)"""
		if self.values.shape != other.values.shape or self.h != other.h:
			raise ValidationError("Inner product needs fields on the same sample grid")
		return complex(np.sum(np.conj(self.values) * other.values * _trapezoid_weights(self)))

	def norm(self) -> float:
		"""Trapezoid L² norm of the samples"""
		return float(np.sqrt(np.sum(np.abs(self.values) ** 2 * _trapezoid_weights(self))))

	def write_csv(self, path : str):
		"""Write the field as plain text: a header line "X,h,nx,ny", its values, then "re,im" and one row per
		sample in row-major order (index i along x1 varies slowest)"""
		with open(path, "w", encoding="utf-8", newline="\n") as out_file:
			out_file.write("X,h,nx,ny\n")
			out_file.write(f"{self.X!r},{self.h!r},{self.nx},{self.ny}\n")
			out_file.write("re,im\n")
			np.savetxt(out_file, np.column_stack([self.values.real.ravel(), self.values.imag.ravel()]),
				delimiter=",", fmt="%.17g")

	@classmethod
	def read_csv(cls, path : str) -> 'SampledField':
		"""Inverse of write_csv.

		Raises:
			OSError: the file does not exist
			ValidationError: malformed header or wrong number of samples
		"""
		if not os.path.exists(path):
			raise OSError(f"Could not load field from path {path}, path does not exist.")
		with open(path, "r", encoding="utf-8") as in_file:
			header = in_file.readline().strip()
			if header.replace(" ", "") != "X,h,nx,ny":
				raise ValidationError(f"{path}: expected header 'X,h,nx,ny', got '{header}'")
			try:
				x_text, h_text, nx_text, ny_text = in_file.readline().strip().split(",")
				box, spacing, nx, ny = float(x_text), float(h_text), int(nx_text), int(ny_text)
			except ValueError as exception:
				raise ValidationError(f"{path}: malformed header values ({exception})") from exception
			if in_file.readline().strip().replace(" ", "") != "re,im":
				raise ValidationError(f"{path}: expected column header 're,im' on line 3")
			data = np.loadtxt(in_file, delimiter=",", ndmin=2)
		if data.shape != (nx * ny, 2):
			raise ValidationError(f"{path}: expected {nx * ny} rows of (re, im), got {data.shape[0]}")
		return cls(X=box, h=spacing, values=(data[:, 0] + 1j * data[:, 1]).reshape(nx, ny))


def _sample_count(X : float, h : float) -> int: #pylint: disable=invalid-name
	if h <= 0 or X <= 0:
		raise ValidationError(f"X and h must be positive, got X={X}, h={h}")
	ratio = X / h
	if abs(ratio - round(ratio)) > 1e-9 * max(1.0, ratio):
		raise ValidationError(f"X={X} is not an integer multiple of h={h}")
	return int(round(ratio)) + 1


def _trapezoid_weights(sampled : SampledField) -> np.ndarray:
	wx = np.full(sampled.nx, sampled.h)
	wy = np.full(sampled.ny, sampled.h)
	wx[[0, -1]] *= 0.5
	wy[[0, -1]] *= 0.5
	return np.outer(wx, wy)


def tensor_rule(box : Box, order : int) -> typing.Tuple[np.ndarray, np.ndarray]:
	"""Tensor Gauss-Legendre rule on a rectangle: nodes (order², 2) and weights (order²,)"""
	ref_nodes, ref_weights = np.polynomial.legendre.leggauss(order)
	x1_min, x1_max, x2_min, x2_max = box
	n1 = 0.5 * (x1_max - x1_min) * (ref_nodes + 1.0) + x1_min
	n2 = 0.5 * (x2_max - x2_min) * (ref_nodes + 1.0) + x2_min
	w = np.outer(0.5 * (x1_max - x1_min) * ref_weights, 0.5 * (x2_max - x2_min) * ref_weights).ravel()
	g1, g2 = np.meshgrid(n1, n2, indexing="ij")
	return np.stack([g1.ravel(), g2.ravel()], axis=-1), w


def duffy_rule(box : Box, center : typing.Sequence[float], order : int) -> typing.Tuple[np.ndarray, np.ndarray]:
	"""Quadrature on a rectangle for integrands with a point singularity of type log r or 1/r at `center`.

	The rectangle is split at the projection of `center` onto it, every piece into two triangles with a vertex at
	that point, and each triangle is mapped from the unit square by y = c + u·((1-v)(p1 - c) + v(p2 - c)), whose
	Jacobian u·|det(p1 - c, p2 - c)| vanishes at the singular vertex.
	"""
	x1_min, x1_max, x2_min, x2_max = box
	c = np.array([np.clip(center[0], x1_min, x1_max), np.clip(center[1], x2_min, x2_max)])
	ref_nodes, ref_weights = np.polynomial.legendre.leggauss(order)
	u = 0.5 * (ref_nodes + 1.0)
	w = 0.5 * ref_weights
	uu, vv = np.meshgrid(u, u, indexing="ij")
	ww = np.outer(w, w)

	nodes, weights = [], []
	for x_far in (x1_min, x1_max):
		for y_far in (x2_min, x2_max):
			if x_far == c[0] or y_far == c[1]:
				continue
			corners = (np.array([x_far, c[1]]), np.array([x_far, y_far]), np.array([c[0], y_far]))
			for p1, p2 in ((corners[0], corners[1]), (corners[1], corners[2])):
				a, b = p1 - c, p2 - c
				jacobian = abs(a[0] * b[1] - a[1] * b[0])
				direction = (1.0 - vv)[..., None] * a + vv[..., None] * b
				nodes.append((c + uu[..., None] * direction).reshape(-1, 2))
				weights.append((uu * ww * jacobian).ravel())
	if not nodes:
		return np.zeros((0, 2)), np.zeros(0)
	return np.concatenate(nodes), np.concatenate(weights)


def _box_distance(box : Box, point : np.ndarray) -> float:
	dx = max(box[0] - point[0], 0.0, point[0] - box[1])
	dy = max(box[2] - point[1], 0.0, point[1] - box[3])
	return float(np.hypot(dx, dy))


def _wavenumber_off_spectrum(z : complex) -> Wavenumber:
	z = complex(z)
	if z.imag == 0 and z.real >= 0:
		raise DomainError(f"z={z} lies on the essential spectrum [0, ∞), the resolvent is only applied off it")
	return Wavenumber.from_energy(z)


def apply_free_resolvent(z : complex, f : SampledField, x : PointLike, order : int = DEFAULT_QUADRATURE_ORDER
		) -> typing.Union[complex, np.ndarray]:
	"""R₀(z)f(x) = ∫ 𝔊⁽⁰⁾(√z)(x, y)f(y)dy for the Neumann Laplacian on the quarter plane.

	Args:
		z (complex): spectral parameter off [0, ∞)
		f (SampledField): the compactly supported right-hand side
		x (PointLike): evaluation point(s), shape (2,) or (m, 2)
		order (int, optional): Gauss-Legendre order per direction. Defaults to 20.

	Raises:
		DomainError: z on [0, ∞)

	Returns:
		complex | np.ndarray: R₀(z)f at the point(s)
	"""
	wave = _wavenumber_off_spectrum(z)
	pts = as_points(x)
	single = pts.ndim == 1
	pts = np.atleast_2d(pts)
	result = np.zeros(len(pts), dtype=complex)
	box = f.support_box()
	if box is None:
		return result[0] if single else result

	diagonal = float(np.hypot(box[1] - box[0], box[3] - box[2]))
	distances = np.array([_box_distance(box, point) for point in pts])
	far = distances >= NEAR_FRACTION * diagonal
	if np.any(far):
		nodes, weights = tensor_rule(box, order)
		weighted = weights * f.evaluate(nodes)
		far_idx = np.nonzero(far)[0]
		for start in range(0, len(far_idx), 64):
			block = far_idx[start:start + 64]
			result[block] = green_images(wave, pts[block][:, None, :], nodes[None, :, :]) @ weighted

	near_idx = np.nonzero(~far)[0]
	if len(near_idx) and f.source is None and abs(wave.k) * f.h > 0.5 \
			and np.any(distances[near_idx] == 0):
		message = f"Spacing h={f.h} is coarse against 1/|k|={1 / abs(wave.k):.3g} near the singular cell, " \
			"R0 f is of reduced accuracy inside the support"
		log.warning(message)
		warnings.warn(message, QuarterwaveWarning)
	for i in near_idx:
		nodes, weights = duffy_rule(box, pts[i], order)
		result[i] = green_images(wave, pts[i], nodes) @ (weights * f.evaluate(nodes))
	return result[0] if single else result


class Resolvent():
	"""
	R(z) of the Robin Laplacian for one z and one potential. The Nyström matrix is assembled and factorized once
	and shared by every application.
	"""
	def __init__(self, z : complex, pot : BoundaryPotential, grid : BoundaryGrid | None = None,
			order : int = DEFAULT_QUADRATURE_ORDER, **grid_options):
		self.z = complex(z)
		self.wave = _wavenumber_off_spectrum(z)
		self.pot = pot
		self.order = order
		self.grid = grid if grid is not None else build_grid(pot, **grid_options)
		self.matrix : KernelMatrix | None = None
		if pot.sup_abs() > 0:
			self.matrix = assemble(self.wave, self.grid, pot)

	def boundary_density(self, f : SampledField) -> np.ndarray:
		"""sgn(σ)√|σ|·(1 + B)^{-1}(√|σ|·R₀f) at the grid nodes (zero for a vanishing potential)"""
		density = np.zeros(self.grid.nodes_total, dtype=complex)
		if self.matrix is None or f.is_zero():
			return density
		root = self.pot.sqrt_abs(self.grid.coordinates)
		active = np.nonzero(root)[0]
		rhs = np.zeros(self.grid.nodes_total, dtype=complex)
		rhs[active] = root[active] * apply_free_resolvent(self.z, f, self.grid.plane_points[active], self.order)
		return self.pot.signed_sqrt(self.grid.coordinates) * self.matrix.solve(rhs)

	def apply(self, f : SampledField, x : PointLike) -> typing.Union[complex, np.ndarray]:
		"""R(z)f at the point(s) x"""
		free = apply_free_resolvent(self.z, f, x, self.order)
		if self.matrix is None:
			return free
		return free + layer_potential(self.wave, self.grid, self.boundary_density(f), x)


def apply_resolvent(z : complex, f : SampledField, pot : BoundaryPotential, x : PointLike,
		grid : BoundaryGrid | None = None, order : int = DEFAULT_QUADRATURE_ORDER, **grid_options
	) -> typing.Union[complex, np.ndarray]:
	"""(-Δ_σ - z)^{-1}f at the point(s) x, i.e. R₀(z)f - B₁(k)*(1 + B(k))^{-1}B₀(k)f.

	Raises:
		DomainError: z on [0, ∞)
		NearSingularError: z is (numerically) an eigenvalue of the Robin Laplacian
	"""
	return Resolvent(z, pot, grid=grid, order=order, **grid_options).apply(f, x)


def boundary_form_defect(kappa : float,
		phi : typing.Callable[[np.ndarray], np.ndarray],
		phi_support : typing.Tuple[float, float],
		psi : typing.Callable[[np.ndarray], np.ndarray],
		grad_psi : typing.Callable[[np.ndarray], np.ndarray],
		psi_box : Box,
		order : int = 24,
		boundary_order : int = 16
	) -> float:
	"""Relative size of ⟨∇u, ∇ψ⟩ - k̄²⟨u, ψ⟩ - ⟨φ, ψ_bv⟩ at k = iκ, with u = ∫𝔊⁽⁰⁾(k)(·, y)φ(y)dy the single layer
	of the boundary function φ.

	For each boundary node y the area integral ∫[∇ₓ𝔊⁽⁰⁾(x, y)·∇ψ(x) + κ²𝔊⁽⁰⁾(x, y)ψ(x)]dx over the box of ψ is
	computed with the Duffy split at y and compared to ψ(y); the results are then integrated against φ.

	Args:
		kappa (float): k = iκ, κ > 0
		phi (typing.Callable): φ at boundary points (m, 2), real
		phi_support (typing.Tuple[float, float]): φ vanishes outside [a, b] on each half-line, 0 < a < b
		psi (typing.Callable): ψ at points (m, 2), real
		grad_psi (typing.Callable): ∇ψ at points (m, 2), shape (m, 2)
		psi_box (Box): ψ vanishes outside this box of the quarter plane
		order (int, optional): Gauss order of the area rule. Defaults to 24.
		boundary_order (int, optional): Gauss order of the boundary rule per half-line. Defaults to 16.

	Returns:
		float: |sum of the three terms| / (sum of their magnitudes)
	"""
	if kappa <= 0:
		raise DomainError(f"kappa must be positive, got {kappa}")
	lower, upper = phi_support
	if not 0 < lower < upper:
		raise DomainError(f"phi support must satisfy 0 < a < b, got [{lower}, {upper}]")
	wave = Wavenumber.imaginary(kappa)
	ref_nodes, ref_weights = np.polynomial.legendre.leggauss(boundary_order)
	t = 0.5 * (upper - lower) * (ref_nodes + 1.0) + lower
	wt = 0.5 * (upper - lower) * ref_weights
	boundary = np.concatenate([np.stack([t, np.zeros_like(t)], -1), np.stack([np.zeros_like(t), t], -1)])
	boundary_weights = np.concatenate([wt, wt])
	phi_values = np.asarray(phi(boundary), dtype=float)

	gradient_term = 0.0
	mass_term = 0.0
	for y, weight, phi_y in zip(boundary, boundary_weights, phi_values):
		if phi_y == 0:
			continue
		nodes, weights = duffy_rule(psi_box, y, order)
		green = np.real(green_images(wave, nodes, y))
		gradient = np.real(green_images_gradient(wave, nodes, y))
		gradient_term += weight * phi_y * float(np.sum(weights * np.sum(gradient * grad_psi(nodes), axis=-1)))
		mass_term += weight * phi_y * float(np.sum(weights * green * psi(nodes)))

	k_bar_sq = -kappa ** 2
	trace_term = float(np.sum(boundary_weights * phi_values * psi(boundary)))
	defect = gradient_term - k_bar_sq * mass_term - trace_term
	scale = abs(gradient_term) + abs(k_bar_sq * mass_term) + abs(trace_term)
	log.debug(f"Boundary form terms: gradient {gradient_term:.6e}, mass {mass_term:.6e}, trace {trace_term:.6e}")
	return abs(defect) / scale if scale > 0 else 0.0
