import json

import numpy as np
import pytest

from vortexsheet.cli import main
from vortexsheet.io import read_branch, read_table


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_spectrum_to_stdout(capsys):
    code, out, _ = run(capsys, "spectrum", "--sigma", "1", "--nmax", "4")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "# format=1"
    assert lines[2] == "n,detMn,frequency_or_growth,stable"
    dets = [float(ln.split(",")[1]) for ln in lines[3:]]
    np.testing.assert_allclose(dets, [0, 3, 12, 30], atol=1e-12)


def test_spectrum_to_file(tmp_path, capsys):
    assert run(capsys, "spectrum", "--gamma", "1.5", "--out", str(tmp_path))[0] == 0
    meta, header, data = read_table(tmp_path / "spectrum.csv")
    assert meta["gamma"] == "1.5" and data.shape == (8, 4)
    assert set(data[:, 3]) <= {0.0, 1.0}


@pytest.mark.parametrize("argv, code", [
    (["spectrum", "--nmax", "0"], 2),
    (["spectrum", "--sigma", "0"], 2),
    (["thresholds", "--kind", "speed", "--m", "2"], 2),
    (["thresholds", "--kind", "speed", "--m", "1", "--sigma", "1", "--gamma", "0"], 3),
    (["thresholds", "--kind", "tension", "--m", "2", "--c", "-0.5", "--gamma", "1"], 3),
    (["branch", "--kind", "speed", "--m", "2", "--sigma", "1", "--gamma", "0", "--steps", "0"], 2),
    (["branch", "--kind", "speed", "--m", "2", "--sigma", "1", "--gamma", "0", "--ds", "0.01",
      "--steps", "6"], 3),
    (["branch", "--kind", "tension", "--m", "2", "--c", "1", "--gamma", "1", "--sign", "-"], 2),
    (["evolve", "--input", "/nonexistent/branch.csv"], 5),
    (["nonsense"], 2),
])
def test_exit_codes(capsys, argv, code):
    assert run(capsys, *argv)[0] == code


def test_thresholds_report(capsys):
    code, out, _ = run(capsys, "thresholds", "--kind", "speed", "--m", "2", "--sigma", "1", "--gamma", "0")
    assert code == 0
    rep = json.loads(out)
    assert rep["threshold"]["+"] == pytest.approx(np.sqrt(3) / 2)
    assert rep["points"]["+"]["pairing"] == pytest.approx(4 * np.sqrt(3))
    assert rep["collision"]["k2_fraction"] == "-1/4"


def test_kernel_alias(capsys):
    code, out, _ = run(capsys, "kernel", "--kind", "vorticity", "--m", "2", "--sigma", "1")
    assert code == 0
    assert json.loads(out)["points"]["-"]["value"] == pytest.approx(-np.sqrt(3))


def test_config_file_and_override(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# spectrum settings\nsigma = 2\nnmax = 3\n")
    code, out, _ = run(capsys, "spectrum", "--config", str(cfg), "--nmax", "2")
    assert code == 0
    rows = out.splitlines()[3:]
    assert len(rows) == 2
    assert float(rows[1].split(",")[1]) == pytest.approx(2 / 4 * (2 * 2 * 4 - 2 * 2))
    cfg.write_text("bogus = 1\n")
    assert run(capsys, "spectrum", "--config", str(cfg))[0] == 2


def test_branch_then_evolve(tmp_path, capsys):
    code, out, _ = run(capsys, "branch", "--kind", "speed", "--m", "2", "--sigma", "1", "--gamma", "0",
                       "--steps", "5", "--ds", "1e-3", "--out", str(tmp_path))
    assert code == 0
    summary = json.loads(out)
    assert summary["certified"] and summary["max_residual"] <= 1e-10
    assert summary["p0_error"] <= 1e-6
    rec = read_branch(summary["file"])
    assert len(rec) == 5
    code, out, _ = run(capsys, "evolve", "--input", summary["file"], "--dt", "1e-3", "--t-final", "0.02",
                       "--out", str(tmp_path))
    assert code == 0
    ev = json.loads(out)
    assert ev["max_shape_error"] <= 1e-6
    meta, header, data = read_table(ev["file"])
    assert header[0] == "t" and data[-1, 0] == pytest.approx(0.02)


def test_evolve_refuses_unstable_step(tmp_path, capsys, branches):
    from vortexsheet.io import write_branch
    path = write_branch(branches["speed"], tmp_path)
    assert run(capsys, "evolve", "--input", str(path), "--dt", "0.1")[0] == 3


def test_verify_suite(capsys):
    code, out, _ = run(capsys, "verify", "--suite", "operators")
    assert code == 0
    assert out.splitlines()[-1] == "4/4 checks passed"
    assert all(ln.startswith("PASS") for ln in out.splitlines()[:-1])


def test_version(capsys):
    assert run(capsys, "--version")[0] == 0
