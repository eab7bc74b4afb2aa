"""
Implements the Configuration container: a dict of option-group instances whose attributes can be read through the
container with a single `.`, e.g. config.nodes_per_panel instead of config.options["grid"].nodes_per_panel.
"""

from dataclasses import dataclass, field
import typing

from quarterwave.configuration.base_options import BaseOptions


@dataclass
class Configuration(object):
	"""
	A Configuration is built from several option-group dataclass instances, stored in `options` by group name,
	e.g. {"grid": GridOptions(), "solver": SolverOptions(), "bound_states": BoundStateOptions()}.

	NOTE: attribute lookup is flattened over the groups, so groups combined in one configuration must not share
	attribute names (checked by validate()).
	"""
	options : typing.Dict[str, BaseOptions] = field(default_factory=dict)

	def get_option_types(self) -> typing.Dict[str, type]:
		"""The option-group types by group name"""
		return {key: type(value) for key, value in self.options.items()}

	def hasinstance(self, instance_type: type) -> bool:
		"""Whether one of the groups is an instance of the given option type"""
		for value in self.options.values():
			if isinstance(value, instance_type):
				return True
		return False

	def hasattr(self, key):
		"""Whether one of the groups has the given attribute"""
		for options_class in self.options.values():
			if hasattr(options_class, key):
				return True
		return False

	def __getattr__(self, key : str):
		if key.startswith("__") or key == "options": #Return special/internal attributes, otherwise copy goes wrong
			raise AttributeError(f"Attribute {key} not found in any of the options classes")

		for options_instance in self.options.values():
			if hasattr(options_instance, key):
				return getattr(options_instance, key)

		raise AttributeError(f"Attribute {key} not found in any of the options classes")

	def __getitem__(self, key):
		return self.__getattr__(key)

	def get(self, key : str, default : typing.Any):
		"""Like attribute access, but returns default when no group has the attribute"""
		if key is None:
			return default
		try:
			return self.__getattr__(key)
		except AttributeError:
			return default

	def get_dict(self) -> typing.Dict[str, typing.Dict[str, typing.Any]]:
		"""The full configuration as a dict of dicts"""
		return {key: value.to_dict() for key, value in self.options.items()}

	def flat_dict(self) -> typing.Dict[str, typing.Any]:
		"""All option values in one dict (the view offered by attribute access)"""
		flat : typing.Dict[str, typing.Any] = {}
		for value in self.options.values():
			flat.update(value.to_dict())
		return flat

	def validate(self):
		"""Validate every group and check that no attribute name is shared between groups.

		Raises:
			ConfigurationValidationError: a value violates its constraints
			KeyError: two groups define the same attribute
		"""
		seen : typing.Dict[str, str] = {}
		for group_name, group in self.options.items():
			for key in group.to_dict():
				if key in seen:
					raise KeyError(f"Option {key} is defined by both '{seen[key]}' and '{group_name}'")
				seen[key] = group_name
			group.validate()

	@staticmethod
	def get_configuration_from_passed_options(option_dict : typing.Dict[str, BaseOptions]) -> 'Configuration':
		"""Create a new Configuration from a dict of option-group instances"""
		new_config = Configuration()
		new_config.options = dict(option_dict)
		return new_config
