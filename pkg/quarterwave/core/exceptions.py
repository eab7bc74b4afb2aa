"""
Exception and warning types raised by the quarterwave library.

Validation errors (bad input) map to CLI exit code 1, numerical errors to exit code 2.
"""


class QuarterwaveError(Exception):
	"""Base class of all errors raised by quarterwave"""


class ValidationError(QuarterwaveError, ValueError):
	"""
	Raised when input (a potential document, an option value, a geometric argument) does not satisfy its
	documented constraints.
	"""


class PotentialConfigError(ValidationError):
	"""Raised when a potential document is malformed, the message names the offending field"""

	def __init__(self, field_name : str, message : str):
		super().__init__(f"{field_name}: {message}")
		self.field_name = field_name


class ConfigurationValidationError(ValidationError):
	"""Raised when an option value violates the constraints declared in its dataclass-field metadata"""

	def __init__(self, flag : str, message : str):
		super().__init__(f"--{flag.replace('_', '-')}: {message}")
		self.flag = flag


class DomainError(ValidationError):
	"""Argument outside the domain of a function (e.g. negative boundary coordinate)"""


class BranchError(DomainError):
	"""Complex argument on the branch cut of the principal logarithm"""


class SingularityError(DomainError):
	"""Evaluation exactly at a logarithmic singularity of a kernel"""


class SplitRangeError(DomainError):
	"""The series split of K0 was requested outside of its configured radius"""


class NumericalError(QuarterwaveError, ArithmeticError):
	"""Base class for failures of a numerical method on valid input"""


class NearSingularError(NumericalError):
	"""
	The discrete 1+B(k) system is (numerically) singular at the requested wavenumber - k is close to a bound
	state (Im k > 0) or to a point of the exceptional set (real k).
	"""

	def __init__(self, message : str, condition : float = float("inf")):
		super().__init__(message)
		self.condition = condition


class FdConvergenceError(NumericalError):
	"""The finite-difference eigen-iteration did not converge"""


class ConditioningError(NumericalError):
	"""A sparse finite-difference solve was too ill-conditioned to meet its residual contract"""


class QuarterwaveWarning(UserWarning):
	"""Warning category for resolution/accuracy problems that do not invalidate a result"""
