"""
Output records: CSV/JSON writers for result rows and the run manifest.

CSV uses '.' as decimal separator independent of the locale, floats are written with repr() so identical runs give
byte-identical files. JSON output holds the same rows under a versioned schema tag.
"""

import csv
import io
import json
import logging
import os
import typing
from dataclasses import asdict, dataclass, field

import numpy as np

from quarterwave.core.exceptions import ValidationError

log = logging.getLogger(__name__)

SCHEMA = "quarterwave/1"
FORMATS = ("csv", "json")

Row = typing.Dict[str, typing.Any]


def _plain(value : typing.Any) -> typing.Any:
	"""numpy scalars to Python scalars; complex values are not allowed in rows (split them into re_/im_)"""
	if isinstance(value, np.generic):
		value = value.item()
	if isinstance(value, complex):
		raise ValidationError(f"Complex value {value} in an output row, split it into re_/im_ columns")
	return value


def format_cell(value : typing.Any) -> str:
	"""Locale independent text of a CSV cell"""
	value = _plain(value)
	if isinstance(value, bool):
		return "true" if value else "false"
	if isinstance(value, float):
		return repr(value)
	if value is None:
		return ""
	return str(value)


def rows_to_csv(rows : typing.Sequence[Row], columns : typing.Sequence[str] | None = None) -> str:
	"""CSV text with a header line; columns default to the keys of the first row"""
	if columns is None:
		columns = list(rows[0].keys()) if rows else []
	buffer = io.StringIO()
	writer = csv.writer(buffer, lineterminator="\n")
	writer.writerow(columns)
	for row in rows:
		writer.writerow([format_cell(row.get(column, None)) for column in columns])
	return buffer.getvalue()


def rows_to_json(rows : typing.Sequence[Row], command : str | None = None) -> str:
	"""JSON document {"schema": ..., "command": ..., "rows": [...]}"""
	document : typing.Dict[str, typing.Any] = {"schema": SCHEMA}
	if command is not None:
		document["command"] = command
	document["rows"] = [{key: _plain(value) for key, value in row.items()} for row in rows]
	return json.dumps(document, indent=2) + "\n"


def write_rows(rows : typing.Sequence[Row],
		path : str | None,
		output_format : str = "csv",
		command : str | None = None,
		columns : typing.Sequence[str] | None = None,
		stream : typing.TextIO | None = None
	):
	"""Write rows to path (or to stream when path is None) as CSV or JSON"""
	if output_format not in FORMATS:
		raise ValidationError(f"--format: must be one of {FORMATS}, got {output_format!r}")
	text = rows_to_csv(rows, columns) if output_format == "csv" else rows_to_json(rows, command)
	if path is None:
		if stream is not None:
			stream.write(text)
		return
	with open(path, "w", encoding="utf-8", newline="") as out_file:
		out_file.write(text)
	log.info(f"Wrote {len(rows)} row(s) to {path}")


@dataclass
class RunManifest():
	"""What was run: command, potential document, parameters and output"""
	command : str
	potential_config : str | None
	parameters : typing.Dict[str, typing.Any] = field(default_factory=dict)
	output : str | None = None
	format : str = "csv"
	version : str = ""

	def validate(self):
		"""Referenced paths must exist and the format must be known.

		Raises:
			ValidationError: the potential document is missing or the format is unknown
		"""
		if self.potential_config is not None and not os.path.exists(self.potential_config):
			raise ValidationError(f"--config: potential document {self.potential_config} does not exist")
		if self.format not in FORMATS:
			raise ValidationError(f"--format: must be one of {FORMATS}, got {self.format!r}")

	def to_json(self) -> str:
		"""The manifest as a JSON document"""
		document = {"schema": SCHEMA, **asdict(self)}
		return json.dumps(document, indent=2, sort_keys=True, default=str) + "\n"

	def manifest_path(self) -> str | None:
		"""Where the manifest goes: next to the output file, <output>.manifest.json"""
		if self.output is None:
			return None
		return self.output + ".manifest.json"

	def write(self, path : str | None = None) -> str | None:
		"""Write the manifest to path (default manifest_path()), returns the path written to"""
		path = path if path is not None else self.manifest_path()
		if path is None:
			log.warning("No output file given, the run manifest is not written")
			return None
		with open(path, "w", encoding="utf-8") as out_file:
			out_file.write(self.to_json())
		return path

	@staticmethod
	def read(path : str) -> 'RunManifest':
		"""Read a manifest written by write()

		Raises:
			OSError: the file does not exist
			KeyError: a field is missing
		"""
		if not os.path.exists(path):
			raise OSError(f"Could not load manifest from path {path}, path does not exist.")
		with open(path, "r", encoding="utf-8") as in_file:
			document = json.load(in_file)
		for key in ("command", "potential_config"):
			if key not in document:
				raise KeyError(f"Could not load manifest from file {path}, file does not contain (required) key: {key}.")
		document.pop("schema", None)
		return RunManifest(**document)
