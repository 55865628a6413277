"""
Utility functions for file I/O.

Every output file is written to a temporary file in the target directory
and renamed into place, so an interrupted run never leaves a half-written
report behind.
"""

import json
import logging
import os
import tempfile
from typing import Any, Iterable, List

import pandas as pd

logger = logging.getLogger(__name__)


def canonical_json(obj: Any) -> str:
    """The one serialization used for reports and log records."""
    return json.dumps(obj, sort_keys=True, allow_nan=False, separators=(',', ':'))


def write_atomic(path: str, text: str) -> str:
    """
    Write `text` to `path` through a temporary file and rename.

    Parameters
    ----------
    path : str
        Destination file
    text : str
        Full file contents

    Returns
    -------
    str
        The destination path
    """
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp_path = tempfile.mkstemp(dir=directory, prefix='.' + os.path.basename(path) + '.', suffix='.tmp')
    try:
        with os.fdopen(fd, 'w', encoding='utf-8') as f:
            f.write(text)
        os.replace(tmp_path, path)
    except BaseException:
        if os.path.exists(tmp_path):
            os.unlink(tmp_path)
        raise
    logger.debug("wrote %s", path)
    return path


def write_json(path: str, obj: Any) -> str:
    return write_atomic(path, json.dumps(obj, sort_keys=True, allow_nan=False, indent=2) + '\n')


def read_json(path: str) -> Any:
    if not os.path.exists(path):
        raise FileNotFoundError(f"File not found: {path}")
    with open(path, encoding='utf-8') as f:
        return json.load(f)


def write_jsonl(path: str, records: Iterable[Any]) -> str:
    return write_atomic(path, ''.join(canonical_json(r) + '\n' for r in records))


def read_jsonl(path: str) -> List[Any]:
    if not os.path.exists(path):
        raise FileNotFoundError(f"File not found: {path}")
    with open(path, encoding='utf-8') as f:
        return [json.loads(line) for line in f if line.strip()]


def write_csv(path: str, df: pd.DataFrame) -> str:
    return write_atomic(path, df.to_csv(index=False, lineterminator='\n'))


def save_figure(fig, filename, output_dir):
    """
    Save matplotlib figure to output directory.

    Parameters
    ----------
    fig : matplotlib.figure.Figure
        Figure to save
    filename : str
        Filename (without path)
    output_dir : str
        Output directory

    Returns
    -------
    str
        Full path to saved figure
    """
    os.makedirs(output_dir, exist_ok=True)
    full_path = os.path.join(output_dir, filename)
    fig.savefig(full_path, dpi=150, bbox_inches='tight')
    print(f"✓ Saved figure: {full_path}")
    return full_path
