"""
Persistent append-only record of job and resource states.

One JSON object per line. Lines go to a temporary file next to the target
and the file is renamed into place when the run closes the log, so a
crashed run never leaves a truncated log under the final name.
"""

import json
import logging
import os
import tempfile
from typing import Dict, Iterable, List, Optional

from src.errors import BookkeeperError
from src.sim_engine.report import ExperimentReport, fold_records
from src.utils.io import canonical_json

logger = logging.getLogger(__name__)

PRIMITIVES = (str, int, float, bool, type(None))


def _check_record(value, path='record'):
    if isinstance(value, PRIMITIVES):
        return
    if isinstance(value, list):
        for i, item in enumerate(value):
            _check_record(item, f"{path}[{i}]")
        return
    if isinstance(value, dict):
        for key, item in value.items():
            if not isinstance(key, str):
                raise BookkeeperError(f"{path}: non-string key {key!r}")
            _check_record(item, f"{path}.{key}")
        return
    raise BookkeeperError(f"{path}: unsupported value of type {type(value).__name__}")


class Bookkeeper:
    """
    Line-delimited JSON log of a run.

    Parameters
    ----------
    path : str, optional
        Final log location; None keeps the log in memory only
    """

    def __init__(self, path: Optional[str] = None):
        self.path = path
        self.lines: List[str] = []
        self._file = None
        self._tmp_path = None
        if path is not None:
            try:
                directory = os.path.dirname(os.path.abspath(path))
                os.makedirs(directory, exist_ok=True)
                fd, self._tmp_path = tempfile.mkstemp(dir=directory, prefix='.' + os.path.basename(path) + '.',
                                                      suffix='.tmp')
                self._file = os.fdopen(fd, 'w', encoding='utf-8')
            except OSError as exc:
                raise BookkeeperError(f"cannot open bookkeeper log {path}: {exc}") from exc

    def __len__(self):
        return len(self.lines)

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        if exc_type is None:
            self.close()
        else:
            self.abort()

    def append(self, record: Dict):
        """Append one record; any write failure aborts the run with BookkeeperError."""
        _check_record(record)
        try:
            line = canonical_json(record)
        except ValueError as exc:
            raise BookkeeperError(f"record cannot be serialized: {exc}") from exc
        self.lines.append(line)
        if self._file is not None:
            try:
                self._file.write(line + '\n')
            except OSError as exc:
                self.abort()
                raise BookkeeperError(f"write to bookkeeper log {self.path} failed: {exc}") from exc

    def records(self) -> List[Dict]:
        return [json.loads(line) for line in self.lines]

    def report(self) -> ExperimentReport:
        """The report folded from the records exactly as serialized."""
        return fold_records(self.records())

    def close(self):
        if self._file is None:
            return
        try:
            self._file.close()
            os.replace(self._tmp_path, self.path)
        except OSError as exc:
            raise BookkeeperError(f"cannot finalize bookkeeper log {self.path}: {exc}") from exc
        finally:
            self._file = None
        logger.info("bookkeeper log written to %s (%d records)", self.path, len(self.lines))

    def abort(self):
        if self._file is not None:
            try:
                self._file.close()
            except OSError:
                pass
            self._file = None
        if self._tmp_path and os.path.exists(self._tmp_path):
            os.unlink(self._tmp_path)


def read_log(path: str) -> List[Dict]:
    try:
        with open(path, encoding='utf-8') as f:
            return [json.loads(line) for line in f if line.strip()]
    except (OSError, ValueError) as exc:
        raise BookkeeperError(f"cannot read bookkeeper log {path}: {exc}") from exc


def replay(source) -> ExperimentReport:
    """Rebuild the report from a log file path or an iterable of records."""
    records: Iterable[Dict] = read_log(source) if isinstance(source, str) else source
    return fold_records(records)
