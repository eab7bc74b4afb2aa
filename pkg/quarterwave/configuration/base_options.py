"""
Base class of all option groups. Option groups are dataclasses whose fields carry their display name, help text
and value constraints in the field metadata, e.g.:

	panels_per_axis : int = field(default=8, metadata=dict(
		display_name="Panels per axis",
		help="Number of panels on each half-line",
		constraints=[Interval(int, 1, None, closed='both')]
	))
"""

import logging
import math
import typing
from dataclasses import dataclass, fields

from pyside6_utils.classes import \
    Serializable  # Absolute import to avoid import PySide6

from quarterwave.core.exceptions import ConfigurationValidationError

log = logging.getLogger(__name__)


class InstanceMeta(type):
	"""
	Metaclass of BaseOptions: isinstance(configuration, SomeOptions) is True when a Configuration holds a
	SomeOptions group, so functions can type-hint against an option group and still receive the full configuration.
	"""

	def __instancecheck__(cls, __instance: typing.Any) -> bool:
		#pylint: disable=import-outside-toplevel
		from quarterwave.configuration.configuration import Configuration #Import here to avoid circular import
		if type(__instance) == Configuration: #pylint: disable=unidiomatic-typecheck
			return __instance.hasinstance(cls)
		return super().__instancecheck__(__instance)


def constraint_satisfied(constraint : typing.Any, value : typing.Any) -> bool:
	"""Check a single constraint entry: None admits None, a type admits its instances, anything else is asked
	through its is_satisfied_by method"""
	if constraint is None:
		return value is None
	if isinstance(constraint, type):
		if constraint is float and isinstance(value, int) and not isinstance(value, bool):
			return True
		return isinstance(value, constraint)
	return bool(constraint.is_satisfied_by(value))


def describe_constraint(constraint : typing.Any) -> str:
	"""Human readable form of a constraint for error messages"""
	if constraint is None:
		return "None"
	if isinstance(constraint, type):
		return f"an instance of {constraint.__name__}"
	return str(constraint)


@dataclass
class BaseOptions(Serializable, object, metaclass=InstanceMeta):
	"""
	The base option class, all option groups inherit from it. A Configuration is built from one or more groups.
	"""

	def update_using_dict(self, update_dict : dict):
		"""Set the given attributes; keys that are not fields of this group raise a KeyError"""
		names = {option_field.name for option_field in fields(self)}
		for key, value in update_dict.items():
			if key not in names:
				raise KeyError(f"{type(self).__name__} has no option {key}")
			setattr(self, key, value)

	def copy_from(self, other : 'BaseOptions'):
		"""Copy all values from other to self"""
		for key, value in other.__dict__.items():
			setattr(self, key, value)

	def to_dict(self) -> typing.Dict[str, typing.Any]:
		"""Public field values as a plain dict"""
		return {option_field.name: getattr(self, option_field.name) for option_field in fields(self)
			if not option_field.name.startswith('_')}

	def get_public_attrs_as_str(self, sep = "\n") -> str:
		"""All public attributes as "key : value" lines"""
		return sep.join(f"{key} : {value}" for key, value in self.to_dict().items())

	def validate(self):
		"""Check every field against the constraints in its metadata.

		Raises:
			ConfigurationValidationError: a value satisfies none of its constraints or is a non-finite float (the
				message names the flag)
		"""
		for option_field in fields(self):
			constraints = option_field.metadata.get("constraints", None)
			if not constraints:
				continue
			value = getattr(self, option_field.name)
			values = value if isinstance(value, list) and option_field.metadata.get("elementwise", False) else [value]
			for item in values:
				if isinstance(item, float) and not math.isfinite(item):
					raise ConfigurationValidationError(option_field.name, f"value {item!r} must be finite")
				if not any(constraint_satisfied(constraint, item) for constraint in constraints):
					allowed = " or ".join(describe_constraint(constraint) for constraint in constraints)
					raise ConfigurationValidationError(option_field.name, f"value {item!r} must be {allowed}")

	def __getitem__(self, key : str):
		"""Item access to options, None if the option does not exist"""
		return self.__dict__.get(key, None)

	def __setitem__(self, key, value):
		setattr(self, key, value)
