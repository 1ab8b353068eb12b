"""
Tests for CSV ingestion/emission and run manifests.
"""

import sys
import os
import json
import hashlib

# Add the parent directory to the path
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import numpy as np
import pandas as pd
import pytest

from svine.core.errors import InputError
from svine.tools.io_utils import RunManifest, manifest_path, read_series, write_frame


def test_written_series_reads_back_exactly(tmp_path):
    values = np.random.default_rng(61).uniform(size=2000)
    path = write_frame(pd.DataFrame({"u": values}), str(tmp_path / "u.csv"))
    np.testing.assert_array_equal(read_series(path), values)


def test_headerless_series(tmp_path):
    path = tmp_path / "plain.csv"
    path.write_text("0.25\n-1.5\n3e-7\n", encoding="utf-8")
    np.testing.assert_array_equal(read_series(str(path)), [0.25, -1.5, 3e-7])


def test_bad_rows_are_reported_by_line(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("x\n0.1\nabc\n0.3\nnan\n", encoding="utf-8")
    with pytest.raises(InputError, match="line\\(s\\) 3, 5"):
        read_series(str(path))
    with pytest.raises(InputError):
        read_series(str(tmp_path / "missing.csv"))
    two = tmp_path / "two.csv"
    two.write_text("1,2\n3,4\n", encoding="utf-8")
    with pytest.raises(InputError, match="columns"):
        read_series(str(two))


def test_manifest_records_checksums(tmp_path):
    data = tmp_path / "data.csv"
    data.write_text("0.5\n", encoding="utf-8")
    out = str(tmp_path / "out.csv")
    manifest = RunManifest("simulate", {"n": 1}, seed=4)
    manifest.add_input(str(data))
    manifest.add_output(out)
    written = manifest.write(manifest_path(out))
    assert written.endswith("out.manifest.json")
    record = json.loads(open(written, encoding="utf-8").read())
    assert record["inputs"]["data.csv"] == hashlib.sha256(b"0.5\n").hexdigest()
    assert record["outputs"] == ["out.csv"]
    assert record["seed"] == 4
