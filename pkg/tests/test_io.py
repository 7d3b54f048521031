import io

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vortexsheet.io import (FORMAT_LINE, branch_filename, read_branch, read_table, trajectory_header, write_branch,
                            write_table)
from vortexsheet.steady import residual

finite = st.floats(allow_nan=False, allow_infinity=False, width=64)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.tuples(finite, finite), min_size=1, max_size=10))
def test_table_round_trip_is_exact(rows):
    buf = io.StringIO()
    write_table(buf, ["a", "b"], rows, {"kind": "speed", "m": 2})
    buf.seek(0)
    meta, header, data = read_table(buf)
    assert meta == {"kind": "speed", "m": "2"}
    assert header == ["a", "b"]
    np.testing.assert_array_equal(data, np.array(rows))


def test_table_requires_format_line():
    with pytest.raises(ValueError):
        read_table(io.StringIO("a,b\n1,2\n"))
    with pytest.raises(ValueError):
        read_table(io.StringIO(FORMAT_LINE + "\n# x=1\n"))


def test_branch_round_trip(tmp_path, branches):
    br = branches["speed"]
    path = write_branch(br, tmp_path)
    assert path.name == branch_filename(br) == "branch_speed_2_+.csv"
    assert path.read_text().startswith(FORMAT_LINE + "\n")
    rec = read_branch(path)
    assert (rec.kind, rec.m, rec.N, rec.Q, len(rec)) == ("speed", 2, br.N, br.Q, len(br))
    np.testing.assert_array_equal(rec.param, br.values)
    np.testing.assert_array_equal(rec.s, br.amplitudes)
    last = br.steps[-1]
    np.testing.assert_array_equal(rec.state(-1).to_vector(), last.state.to_vector())
    assert rec.params(-1) == last.params
    # the reloaded row is still a zero of the functional
    assert residual(rec.params(-1), rec.state(-1)).y_norm <= 1e-10


def test_tension_branch_file_label(tmp_path, branches):
    assert write_branch(branches["tension"], tmp_path).name == "branch_tension_2_0.csv"


def test_incomplete_metadata(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text(FORMAT_LINE + "\n# kind=speed\ns,param\n")
    with pytest.raises(ValueError):
        read_branch(p)


def test_trajectory_header():
    assert trajectory_header(2) == ["t", "eta_re_1", "eta_re_2", "eta_im_1", "eta_im_2",
                                    "psi_re_1", "psi_re_2", "psi_im_1", "psi_im_2"]
