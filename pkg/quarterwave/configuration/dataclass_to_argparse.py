"""
Binds option dataclasses to argparse: every field becomes a `--flag-name` argument carrying the field's help text,
and parsed namespaces are turned back into validated option instances.
"""

import argparse
import logging
import types
import typing
from dataclasses import MISSING, fields

from quarterwave.configuration.base_options import BaseOptions
from quarterwave.core.exceptions import ValidationError

log = logging.getLogger(__name__)


class OptionArgumentParser(argparse.ArgumentParser):
	"""ArgumentParser that raises a ValidationError instead of exiting when the command line is malformed"""

	def error(self, message : str):
		raise ValidationError(f"{self.prog}: {message}")


def _unwrap_optional(hint : typing.Any) -> typing.Tuple[typing.Any, bool]:
	"""(inner type, is_optional) for `X | None` / typing.Optional[X]"""
	origin = typing.get_origin(hint)
	if origin in (typing.Union, types.UnionType):
		args = [arg for arg in typing.get_args(hint) if arg is not type(None)]
		return args[0], len(args) < len(typing.get_args(hint))
	return hint, False


def flag_name(name : str) -> str:
	"""Field name to command-line flag"""
	return "--" + name.replace("_", "-")


def add_dataclass_arguments(parser : argparse.ArgumentParser, options_type : typing.Type[BaseOptions],
		title : str | None = None):
	"""Add one argument per field of the option dataclass to the parser (in an argument group named `title`).

	bool fields become store_true flags, list fields take one or more values.
	"""
	group = parser.add_argument_group(title or options_type.__name__)
	hints = typing.get_type_hints(options_type)
	for option_field in fields(options_type):
		if option_field.name.startswith("_"):
			continue
		hint, _optional = _unwrap_optional(hints[option_field.name])
		metadata = option_field.metadata
		default = option_field.default
		if option_field.default_factory is not MISSING: #type: ignore
			default = option_field.default_factory() #type: ignore
		kwargs : typing.Dict[str, typing.Any] = dict(
			dest=option_field.name,
			help=metadata.get("help", None),
			metavar=metadata.get("metavar", None),
		)
		if metadata.get("required", False):
			kwargs["required"] = True
		else:
			kwargs["default"] = default

		if hint is bool:
			kwargs.pop("metavar")
			group.add_argument(flag_name(option_field.name), action="store_true", **kwargs)
			continue
		if typing.get_origin(hint) in (list, typing.List):
			kwargs["type"] = typing.get_args(hint)[0]
			kwargs["nargs"] = "+"
		else:
			kwargs["type"] = hint
		group.add_argument(flag_name(option_field.name), **kwargs)


def options_from_namespace(namespace : argparse.Namespace, options_type : typing.Type[BaseOptions]) -> BaseOptions:
	"""Build and validate an option instance from the parsed arguments.

	Raises:
		ConfigurationValidationError: a value violates the constraints in its field metadata
	"""
	values = {option_field.name: getattr(namespace, option_field.name) for option_field in fields(options_type)
		if hasattr(namespace, option_field.name)}
	instance = options_type(**values)
	instance.validate()
	log.debug(f"Parsed {options_type.__name__}: {instance.to_dict()}")
	return instance
