"""
CSV ingestion/emission and run manifests.
"""

import hashlib
import json
import os
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np
import pandas as pd

from svine import __version__
from svine.core.errors import InputError

FLOAT_FORMAT = "%.17g"


def _parse_float(text: str) -> float:
    """Correctly rounded parse; NaN for non-numeric or non-finite text."""
    try:
        value = float(text)
    except ValueError:
        return np.nan
    return value if np.isfinite(value) else np.nan


def read_series(path: str) -> np.ndarray:
    """
    Read a single-column numeric CSV, with an optional header line.

    Raises:
        InputError: missing file, several columns, or non-numeric rows
            (reported with their line numbers).
    """
    if not os.path.isfile(path):
        raise InputError(f"Data file not found: {path}")
    try:
        raw = pd.read_csv(path, header=None, dtype=str, skip_blank_lines=False, keep_default_na=False)
    except pd.errors.EmptyDataError as e:
        raise InputError(f"Data file {path} is empty") from e
    except pd.errors.ParserError as e:
        raise InputError(f"Data file {path} is not a single-column CSV: {e}") from e
    if raw.shape[1] != 1:
        raise InputError(f"Data file {path} has {raw.shape[1]} columns; expected 1")
    column = raw.iloc[:, 0].str.strip()
    values = column.map(_parse_float)
    first_line = 1
    if len(values) and pd.isna(values.iloc[0]) and column.iloc[0] != "":
        values, column = values.iloc[1:], column.iloc[1:]
        first_line = 2
    bad = np.flatnonzero(values.isna().to_numpy())
    if bad.size:
        lines = ", ".join(str(first_line + i) for i in bad[:20])
        more = "" if bad.size <= 20 else f" (and {bad.size - 20} more)"
        raise InputError(f"Non-numeric rows in {path} at line(s) {lines}{more}")
    return values.to_numpy(dtype=float)


def write_frame(df: pd.DataFrame, path: str) -> str:
    """Write a table as CSV with 17 significant digits."""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    df.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    return path


def write_json(data: Dict[str, Any], path: str) -> str:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(data, f, indent=2)
        f.write("\n")
    return path


def file_checksum(path: str) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as f:
        for block in iter(lambda: f.read(1 << 16), b""):
            digest.update(block)
    return digest.hexdigest()


def manifest_path(out_path: str) -> str:
    """<out>.manifest.json next to a file output, or inside a directory output."""
    if os.path.isdir(out_path) or out_path.endswith(os.sep):
        return os.path.join(out_path, "manifest.json")
    root, _ = os.path.splitext(out_path)
    return root + ".manifest.json"


@dataclass
class RunManifest:
    """What a command did: enough to re-run it and check its outputs."""

    command: str
    arguments: Dict[str, Any]
    seed: Optional[int] = None
    version: str = __version__
    inputs: Dict[str, str] = field(default_factory=dict)
    outputs: List[str] = field(default_factory=list)

    def add_input(self, path: str):
        self.inputs[os.path.basename(path)] = file_checksum(path)

    def add_output(self, path: str):
        self.outputs.append(os.path.basename(path))

    def write(self, path: str) -> str:
        return write_json(asdict(self), path)
