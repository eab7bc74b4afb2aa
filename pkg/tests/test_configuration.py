import pytest

from quarterwave.configuration.configuration import Configuration
from quarterwave.configuration.dataclass_to_argparse import (OptionArgumentParser, add_dataclass_arguments,
                                                             flag_name, options_from_namespace)
from quarterwave.configuration.options import (AmplitudeOptions, BoundStateOptions, GridOptions, OutputOptions,
                                               PotentialOptions, RuntimeOptions, ScanOptions, SolverOptions)
from quarterwave.core.exceptions import ConfigurationValidationError, ValidationError


def test_defaults_are_valid():
	for options_type in (GridOptions, SolverOptions, OutputOptions, RuntimeOptions, BoundStateOptions,
			AmplitudeOptions, ScanOptions):
		options_type().validate()


@pytest.mark.parametrize("options, flag", [
	(GridOptions(panels_per_axis=0), "--panels-per-axis"),
	(GridOptions(truncation_threshold=-1.0), "--truncation-threshold"),
	(BoundStateOptions(kappa_min=-1.0), "--kappa-min"),
	(AmplitudeOptions(k=[1.0, -2.0]), "--k"),
	(RuntimeOptions(log_level="LOUD"), "--log-level"),
	(OutputOptions(format="xml"), "--format"),
	(SolverOptions(residual_tolerance=1.0), "--residual-tolerance"),
	(AmplitudeOptions(k=[1.0, float("inf")]), "--k"),
	(ScanOptions(k_max=float("nan")), "--k-max"),
	(SolverOptions(condition_limit=float("inf")), "--condition-limit"),
	(GridOptions(truncation_threshold=float("inf")), "--truncation-threshold"),
])
def test_violations_name_the_flag(options, flag):
	with pytest.raises(ConfigurationValidationError) as info:
		options.validate()
	assert str(info.value).startswith(flag + ":")


def test_optional_fields_accept_none():
	GridOptions(truncation_threshold=None, grading_levels=None).validate()
	RuntimeOptions(threads=None, checkpoint=None).validate()


def test_grid_kwargs():
	assert GridOptions(panels_per_axis=12).grid_kwargs() == {"panels_per_axis": 12, "nodes_per_panel": 16,
		"truncation_threshold": None, "grading_levels": None}


def test_configuration_flattens_the_groups():
	config = Configuration.get_configuration_from_passed_options({"grid": GridOptions(nodes_per_panel=20),
		"command": ScanOptions()})
	assert config.nodes_per_panel == 20
	assert config["k_samples"] == 200
	assert config.get("missing", 3) == 3
	assert config.hasattr("k_max")
	assert config.flat_dict()["panels_per_axis"] == 8
	assert config.get_dict()["command"]["k_min"] == 0.1
	assert isinstance(config, GridOptions)
	assert not isinstance(config, BoundStateOptions)
	with pytest.raises(AttributeError):
		config.missing #pylint: disable=pointless-statement
	config.validate()


def test_configuration_rejects_shared_names():
	config = Configuration.get_configuration_from_passed_options({"first": GridOptions(), "second": GridOptions()})
	with pytest.raises(KeyError):
		config.validate()


def test_update_using_dict():
	options = ScanOptions()
	options.update_using_dict({"k_min": 0.5})
	assert options.k_min == 0.5
	with pytest.raises(KeyError):
		options.update_using_dict({"kappa": 1.0})


def _parser(*option_types):
	parser = OptionArgumentParser(prog="test")
	for options_type in option_types:
		add_dataclass_arguments(parser, options_type)
	return parser


def test_arguments_are_bound_to_fields():
	parser = _parser(GridOptions, AmplitudeOptions, OutputOptions)
	namespace = parser.parse_args(["--panels-per-axis", "12", "--k", "1.0", "2.5", "--manifest"])
	grid = options_from_namespace(namespace, GridOptions)
	amplitude = options_from_namespace(namespace, AmplitudeOptions)
	output = options_from_namespace(namespace, OutputOptions)
	assert grid.panels_per_axis == 12
	assert grid.nodes_per_panel == 16
	assert amplitude.k == [1.0, 2.5]
	assert amplitude.omega_deg == [45.0]
	assert output.manifest is True
	assert output.out is None


def test_parse_errors_raise():
	parser = _parser(PotentialOptions, GridOptions)
	with pytest.raises(ValidationError):
		parser.parse_args(["--panels-per-axis", "4"])
	with pytest.raises(ValidationError):
		parser.parse_args(["--config", "step.json", "--panels-per-axis", "many"])
	namespace = parser.parse_args(["--config", "step.json", "--panels-per-axis", "0"])
	with pytest.raises(ConfigurationValidationError):
		options_from_namespace(namespace, GridOptions)


def test_flag_name():
	assert flag_name("omega_prime_deg") == "--omega-prime-deg"
