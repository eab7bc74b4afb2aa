"""
Implements the SweepRunner - runs the tasks of a parameter sweep (one task per k or κ) on a thread pool, returns the
results in input order and optionally checkpoints finished tasks to disk so an interrupted sweep can be resumed.
"""

import logging
import os
import threading
import typing

import dill
import multiprocess
import PySignal
from pathos.pools import ThreadPool

log = logging.getLogger(__name__)

THREADS_ENVIRONMENT_VARIABLE = "QUARTERWAVE_THREADS"
CHECKPOINT_VERSION = 1
CHECKPOINT_REQUIRED_KEYS = ("version", "sweeps")


def default_thread_count() -> int:
	"""QUARTERWAVE_THREADS if set (and a positive integer), the CPU count otherwise"""
	value = os.environ.get(THREADS_ENVIRONMENT_VARIABLE, None)
	if value:
		try:
			count = int(value)
		except ValueError:
			log.warning(f"Ignoring {THREADS_ENVIRONMENT_VARIABLE}={value!r}: not an integer")
		else:
			if count >= 1:
				return count
			log.warning(f"Ignoring {THREADS_ENVIRONMENT_VARIABLE}={value!r}: must be at least 1")
	return max(1, multiprocess.cpu_count())


def load_checkpoint(path : str) -> typing.Dict[str, typing.Any]:
	"""Load the contents dict of a checkpoint file.

	Raises:
		OSError: the file does not exist
		KeyError: the file does not contain one of the required keys
	"""
	if not os.path.exists(path):
		raise OSError(f"Could not load checkpoint from path {path}, path does not exist.")
	with open(path, "rb") as load_file:
		contents_dict = dill.load(load_file)
	if not isinstance(contents_dict, dict):
		raise KeyError(f"Could not load checkpoint from file {path}, file does not contain a checkpoint dict.")
	for key in CHECKPOINT_REQUIRED_KEYS:
		if key not in contents_dict:
			raise KeyError(f"Could not load checkpoint from file {path}, file does not contain (required) key: {key}.")
	return contents_dict


class SweepRunner():
	"""
	Maps a function over the items of a sweep using a pathos ThreadPool. The numerical work is numpy/LAPACK bound, so
	threads share the assembled grids without pickling them.

	Every call of map() is identified by a label. With a checkpoint path, the results of finished items are stored
	under that label together with the items and a fingerprint of everything else the results depend on (potential,
	grid, command options). A later map() with the same label, items and fingerprint only computes the missing ones,
	any other stored entry under the label is discarded.
	"""
	taskFinished = PySignal.ClassSignal() #label, number of finished items, total number of items
	sweepFinished = PySignal.ClassSignal() #label, total number of items

	def __init__(self, n_threads : int | None = None, checkpoint_path : str | None = None):
		self.n_threads = n_threads if n_threads is not None else default_thread_count()
		self.checkpoint_path = checkpoint_path
		self._checkpoint_mutex = threading.Lock()
		self._contents : typing.Dict[str, typing.Any] = {"version": CHECKPOINT_VERSION, "sweeps": {}}
		if checkpoint_path is not None and os.path.exists(checkpoint_path):
			self._contents = load_checkpoint(checkpoint_path)
			log.info(f"Resuming from checkpoint {checkpoint_path} with sweeps {list(self._contents['sweeps'])}")

	def _save_checkpoint(self):
		"""Write the contents dict (caller holds the checkpoint mutex)"""
		if self.checkpoint_path is None:
			return
		temporary_path = self.checkpoint_path + ".tmp"
		with open(temporary_path, "wb") as save_file:
			dill.dump(self._contents, save_file)
		os.replace(temporary_path, self.checkpoint_path)

	def finished_results(self, label : str, items : typing.Sequence[typing.Any],
			fingerprint : typing.Any = None) -> typing.Dict[int, typing.Any]:
		"""Results stored for this label, by item index. Empty if the stored sweep has different items or was run
		with a different fingerprint."""
		sweep = self._contents["sweeps"].get(label, None)
		if sweep is None:
			return {}
		if list(sweep["items"]) != list(items) or sweep.get("fingerprint", None) != fingerprint:
			if sweep["results"]:
				log.warning(f"Sweep '{label}': discarding {len(sweep['results'])} checkpointed result(s) computed for "
					"other items or parameters")
			return {}
		return dict(sweep["results"])

	def map(self, func : typing.Callable[[typing.Any], typing.Any], items : typing.Iterable[typing.Any],
			label : str = "sweep", fingerprint : typing.Any = None) -> typing.List[typing.Any]:
		"""Apply func to every item, results in the order of the items.

		fingerprint is any picklable value that compares equal only for runs whose results may be shared, e.g. a
		dict of the potential document and the numeric options.
		"""
		items = list(items)
		total = len(items)
		results = self.finished_results(label, items, fingerprint)
		if results:
			log.info(f"Sweep '{label}': {len(results)}/{total} item(s) restored from the checkpoint")
		with self._checkpoint_mutex:
			self._contents["sweeps"][label] = {"items": items, "fingerprint": fingerprint, "results": dict(results)}
		pending = [index for index in range(total) if index not in results]

		def run_one(index : int) -> typing.Any:
			result = func(items[index])
			with self._checkpoint_mutex:
				stored = self._contents["sweeps"][label]["results"]
				stored[index] = result
				finished = len(stored)
				self._save_checkpoint()
			self.taskFinished.emit(label, finished, total)
			return result

		if len(pending) <= 1 or self.n_threads == 1:
			computed = [run_one(index) for index in pending]
		else:
			pool = ThreadPool(nodes=min(self.n_threads, len(pending)))
			try:
				computed = pool.map(run_one, pending)
			finally:
				pool.close()
				pool.join()
				pool.clear()
		results.update(zip(pending, computed))
		self.sweepFinished.emit(label, total)
		return [results[index] for index in range(total)]

	def mapper(self, label : str, fingerprint : typing.Any = None
		) -> typing.Callable[[typing.Callable, typing.Iterable], typing.List[typing.Any]]:
		"""A map-like callable bound to one label and fingerprint, to pass as the `mapper` of the core sweep functions"""
		def labelled_map(func : typing.Callable, items : typing.Iterable) -> typing.List[typing.Any]:
			return self.map(func, items, label, fingerprint)
		return labelled_map
