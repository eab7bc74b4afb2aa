import io
import json
import os

import numpy as np
import pytest

from quarterwave.app import cli, verify
from quarterwave.classes.records import SCHEMA, RunManifest
from quarterwave.core.exceptions import NumericalError
from quarterwave.core.resolvent import SampledField


def _run(*argv):
	stdout = io.StringIO()
	code = cli.run(list(argv), stdout=stdout)
	return code, stdout.getvalue()


def _amplitude_args(step_path, *extra):
	return ["amplitude", "--config", step_path, "--k", "1.0", "--omega-deg", "30", "--omega-prime-deg", "50",
		"--threads", "1", *extra]


def test_amplitude_csv(step_path):
	code, text = _run(*_amplitude_args(step_path))
	assert code == cli.EXIT_SUCCESS
	lines = text.splitlines()
	assert lines[0] == ",".join(cli.AMPLITUDE_COLUMNS)
	assert len(lines) == 2
	assert lines[1].startswith("1.0,")
	assert lines[1].endswith(",full")


def test_amplitude_json(step_path):
	code, text = _run(*_amplitude_args(step_path, "--format", "json", "--normalization", "displayed"))
	assert code == cli.EXIT_SUCCESS
	document = json.loads(text)
	assert document["schema"] == SCHEMA
	assert document["command"] == "amplitude"
	assert len(document["rows"]) == 1


def test_output_is_deterministic(step_path):
	assert _run(*_amplitude_args(step_path))[1] == _run(*_amplitude_args(step_path))[1]


def test_output_file_and_manifest(tmp_path, step_path):
	out = str(tmp_path / "amplitude.csv")
	code, text = _run(*_amplitude_args(step_path, "--out", out, "--manifest"))
	assert code == cli.EXIT_SUCCESS
	assert text == ""
	assert os.path.exists(out)
	manifest = RunManifest.read(out + ".manifest.json")
	assert manifest.command == "amplitude"
	assert manifest.potential_config == step_path
	assert manifest.parameters["k"] == [1.0]


def test_checkpoint_is_not_reused_for_another_potential(tmp_path, step_path):
	checkpoint = str(tmp_path / "amplitude.pkl")
	strong_path = tmp_path / "strong.json"
	strong_path.write_text(json.dumps({"shape": "step", "sigma0": 1.0, "L": 1.0, "alpha": 2.0}), encoding="utf-8")
	weak_text = _run(*_amplitude_args(step_path, "--checkpoint", checkpoint))[1]
	strong_text = _run(*_amplitude_args(str(strong_path), "--checkpoint", checkpoint))[1]
	assert strong_text == _run(*_amplitude_args(str(strong_path)))[1]
	assert strong_text != weak_text
	displayed_args = ("--normalization", "displayed")
	displayed_text = _run(*_amplitude_args(str(strong_path), "--checkpoint", checkpoint, *displayed_args))[1]
	assert displayed_text == _run(*_amplitude_args(str(strong_path), *displayed_args))[1]
	assert displayed_text != strong_text


def test_weak_coupling(step_path):
	code, text = _run("weak-coupling", "--config", step_path, "--k", "0.5", "1.0", "--omega-deg", "30",
		"--omega-prime-deg", "50", "70")
	assert code == cli.EXIT_SUCCESS
	lines = text.splitlines()[1:]
	assert len(lines) == 4
	assert all(line.endswith(",weak_coupling") for line in lines)


def test_scan(step_path):
	code, text = _run("scan", "--config", step_path, "--k-min", "0.5", "--k-max", "1.5", "--k-samples", "3",
		"--threads", "1")
	assert code == cli.EXIT_SUCCESS
	lines = text.splitlines()
	assert lines[0] == "k,smin,flagged"
	assert [line.split(",")[0] for line in lines[1:]] == ["0.5", "1.0", "1.5"]
	assert all(line.endswith(",false") for line in lines[1:])


def test_eigenfunction(step_path):
	code, text = _run("eigenfunction", "--config", step_path, "--box", "1.0", "--spacing", "0.5")
	assert code == cli.EXIT_SUCCESS
	lines = text.splitlines()
	assert lines[0] == "x1,x2,re_psi,im_psi"
	assert len(lines) == 10


def test_resolvent(tmp_path, step_path):
	field_path = str(tmp_path / "f.csv")
	SampledField.from_function(lambda points: np.exp(-4.0 * np.sum((points - 1.0) ** 2, axis=-1)), 2.0, 0.5,
		keep_source=False).write_csv(field_path)
	code, text = _run("resolvent", "--config", step_path, "--field-path", field_path, "--z-re", "-1.0", "--stride",
		"2")
	assert code == cli.EXIT_SUCCESS
	lines = text.splitlines()
	assert lines[0] == "x1,x2,re_u,im_u"
	assert len(lines) == 10

	field_out = str(tmp_path / "u.csv")
	code, _text = _run("resolvent", "--config", step_path, "--field-path", field_path, "--field-out", field_out)
	assert code == cli.EXIT_SUCCESS
	assert SampledField.read_csv(field_out).values.shape == (5, 5)


def test_fd_eigen(step_path):
	code, text = _run("fd-eigen", "--config", step_path, "--box-size", "4", "--step", "0.5", "--refine")
	assert code == cli.EXIT_SUCCESS
	lines = text.splitlines()
	assert lines[0] == "index,h,eigenvalue,eigenvalue_half_step,extrapolated"
	assert len(lines) == 2


@pytest.mark.slow
def test_bound_states(step_path):
	code, text = _run("bound-states", "--config", step_path, "--kappa-min", "0.05", "--kappa-samples", "8")
	assert code == cli.EXIT_SUCCESS
	lines = text.splitlines()
	assert lines[0] == "kappa,energy,smin"
	assert len(lines) >= 2


@pytest.mark.parametrize("argv, flag", [
	(["bound-states", "--kappa-min", "-1"], "--kappa-min"),
	(["bound-states", "--kappa-min", "2", "--kappa-max", "1"], "--kappa-max"),
	(["scan", "--k-min", "2", "--k-max", "1"], "--k-max"),
	(["fd-eigen", "--box-size", "1", "--step", "0.3"], "--step"),
	(["eigenfunction", "--box", "1", "--spacing", "0.3"], "--spacing"),
	(["amplitude", "--omega-prime-deg", "90"], "--omega-prime-deg"),
	(["amplitude", "--nodes-per-panel", "1"], "--nodes-per-panel"),
	(["amplitude", "--k", "inf"], "--k"),
	(["eigenfunction", "--box", "inf"], "--box"),
	(["scan", "--k-max", "nan"], "--k-max"),
	(["resolvent", "--field-path", "f.csv", "--z-re", "1.0"], "--z-re"),
	(["resolvent", "--field-path", "f.csv", "--stride", "2", "--field-out", "u.csv"], "--field-out"),
])
def test_invalid_input_names_the_flag(capsys, step_path, argv, flag):
	code, _text = _run(*argv, "--config", step_path)
	assert code == cli.EXIT_VALIDATION
	assert flag in capsys.readouterr().err


def test_missing_files(tmp_path, step_path):
	assert _run("scan", "--config", str(tmp_path / "missing.json"))[0] == cli.EXIT_VALIDATION
	assert _run("resolvent", "--config", step_path, "--field-path", str(tmp_path / "missing.csv"))[0] \
		== cli.EXIT_VALIDATION


def test_malformed_command_line(step_path):
	assert _run("scan")[0] == cli.EXIT_VALIDATION
	assert _run("no-such-command")[0] == cli.EXIT_VALIDATION
	assert _run("scan", "--config", step_path, "--k-samples", "few")[0] == cli.EXIT_VALIDATION


def test_numerical_failure_exit_code(monkeypatch, step_path):
	def failing(_config, _runner):
		raise NumericalError("singular")
	monkeypatch.setattr(cli.COMMANDS["scan"], "handler", failing)
	assert _run("scan", "--config", step_path)[0] == cli.EXIT_NUMERICAL


def test_verify_table():
	code, text = _run("verify", "--only", "free_case", "sigma_hat")
	assert code == cli.EXIT_SUCCESS
	lines = text.splitlines()
	assert lines[0].startswith("check")
	assert len(lines) == 3
	assert all(" PASS " in line for line in lines[1:])


def test_verify_json():
	code, text = _run("verify", "--only", "free_case", "--format", "json")
	assert code == cli.EXIT_SUCCESS
	document = json.loads(text)
	assert document["rows"][0]["check"] == "free_case"
	assert document["rows"][0]["passed"] is True


def test_failed_check_exit_code(monkeypatch):
	monkeypatch.setattr(verify, "CHECKS", [verify.AcceptanceCheck("failing", "never passes",
		lambda: verify.CheckResult("failing", False, 1.0, 0.0))])
	assert _run("verify")[0] == cli.EXIT_NUMERICAL
	assert _run("verify", "--only", "free_case")[0] == cli.EXIT_VALIDATION
