import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lzzeno import io
from lzzeno.dynamics import SimConfig, integrate
from lzzeno.lz_model import LzParams


@given(st.lists(st.floats(allow_nan=False, allow_infinity=False), min_size=1, max_size=20))
def test_float_round_trip(values):
    for v in values:
        assert float(io.fmt(v)) == v or (v == 0.0 and io.fmt(v) == "0")


@pytest.mark.filterwarnings("ignore::lzzeno.dynamics.ConvergenceWarning")
def test_trajectory_csv_round_trip(tmp_path):
    traj = integrate(SimConfig(LzParams(0.5, 1.0), t_start=-5.0, t_end=5.0))
    path = io.write_trajectory(tmp_path / "t.csv", traj)
    header, data = io.read_csv(path)
    assert tuple(header) == io.TRAJECTORY_HEADER
    np.testing.assert_array_equal(data, io.trajectory_rows(traj))


def test_malformed_csv_reports_line(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("a,b\n1,2\n3\n")
    with pytest.raises(io.CsvFormatError) as err:
        io.read_csv(p)
    assert err.value.line == 3
    p.write_text("a,b\n1,zz\n")
    with pytest.raises(io.CsvFormatError, match=":2:"):
        io.read_csv(p)
    p.write_text("")
    with pytest.raises(io.CsvFormatError):
        io.read_csv(p)


def test_manifest(tmp_path):
    m = io.build_manifest("simulate", {"z": np.float64(0.5)}, [tmp_path / "x.csv"], wall_clock=1.0)
    path = io.write_manifest(io.manifest_path(tmp_path / "x.csv"), m)
    assert path.name == "x.manifest.json"
    loaded = json.loads(path.read_text())
    assert loaded["config"]["z"] == 0.5 and loaded["outputs"] == ["x.csv"]
