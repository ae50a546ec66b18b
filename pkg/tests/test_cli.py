import json
import math
import subprocess
import sys

import pytest

from wcdim.cli import fmt, main

from conftest import SCENES


def scene(name):
    return str(SCENES / f"{name}.scene")


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_fmt():
    assert fmt(0.0) == "0"
    assert fmt(0.5) == "0.50000000000000000"
    assert float(fmt(math.pi)) == math.pi


def test_bound(capsys):
    code, out, err = run(capsys, "bound", scene("cantor"))
    assert code == 0 and err == ""
    assert float(out) == pytest.approx(math.log(2) / math.log(3), abs=1e-12)
    code, out, _ = run(capsys, "bound", scene("two_points"))
    assert out.strip() == "0"


def test_bound_csv(capsys, tmp_path):
    path = tmp_path / "x.csv"
    code, out, _ = run(capsys, "bound", scene("piecewise"), "--csv", str(path), "--t-points", "16")
    assert code == 0 and float(out) == pytest.approx(0.5, abs=1e-9)
    rows = path.read_text().splitlines()
    assert rows[0] == "t,x" and len(rows) == 17
    xs = [float(r.split(",")[1]) for r in rows[1:]]
    assert xs == sorted(xs)
    assert xs[-1] == pytest.approx(1.0, abs=1e-9)  # t = D = 2 sees alpha 1/2


def test_exit_codes(capsys, tmp_path):
    assert run(capsys, "bound", str(tmp_path / "missing.scene"))[0] == 2
    bad = tmp_path / "bad.scene"
    bad.write_text("space 1 euclidean box [0] [1]\nmap L similarity 0.5 [0] alpha const 1.0\nmap R similarity 0.5 [0.5] alpha const 0.5\n")
    code, out, err = run(capsys, "bound", str(bad))
    assert code == 3 and out == "" and "line 2" in err
    bad.write_text("space 1 euclidean box [0] [1]\nmap L\n")
    assert run(capsys, "bound", str(bad))[0] == 2


def test_attractor_csv(capsys):
    code, out, _ = run(capsys, "attractor", scene("sierpinski"), "--points", "50", "--seed", "1")
    lines = out.splitlines()
    assert code == 0 and lines[0] == "x1,x2" and len(lines) == 51
    assert run(capsys, "attractor", scene("sierpinski"), "--points", "50", "--seed", "1")[1] == out


def test_cover(capsys):
    code, out, _ = run(capsys, "cover", scene("cantor"), "--depth", "4")
    rows = [r.split(",") for r in out.splitlines()]
    assert rows[0] == ["depth", "max_bound", "sum_at_x0", "word_count"]
    assert [int(r[0]) for r in rows[1:]] == [1, 2, 3, 4]
    for r in rows[1:]:
        assert float(r[1]) == pytest.approx(3.0 ** -int(r[0]))
        assert float(r[2]) == pytest.approx(1.0, rel=1e-9)
        assert int(r[3]) == 2 ** int(r[0])
    code, out, _ = run(capsys, "cover", scene("cantor"), "--depth", "2", "--exponent", "0")
    assert [r.split(",")[2] for r in out.splitlines()[1:]] == ["2", "4"]


def test_boxdim_from_scene_and_cloud(capsys, tmp_path):
    code, out, _ = run(capsys, "boxdim", scene("cantor"), "--points", "20000")
    fit = json.loads(out)
    assert code == 0 and abs(fit["slope"] - 0.63) < 0.05
    cloud = tmp_path / "c.csv"
    counts = tmp_path / "n.csv"
    run(capsys, "attractor", scene("cantor"), "--points", "20000", "--out", str(cloud))
    code, out, _ = run(
        capsys, "boxdim", str(cloud), "--scene", scene("cantor"), "--scales", "1/3:2:7", "--csv", str(counts)
    )
    assert json.loads(out) == fit
    assert counts.read_text().splitlines()[0] == "epsilon,count"


def test_verify_cantor(capsys, tmp_path):
    out_path = tmp_path / "r.json"
    code, out, _ = run(capsys, "verify", scene("cantor"), "--out", str(out_path), "--pairs", "20000")
    assert code == 0 and out == ""
    rep = json.loads(out_path.read_text())
    assert rep["schema"] == 1
    assert rep["x0"] == pytest.approx(0.6309297535714574, abs=1e-9)
    assert 0.55 <= rep["boxdim"]["slope"] <= 0.68
    assert rep["verdict"]["bound_consistent"] is True
    assert rep["verdict"]["validator_pass"] is True
    assert rep["cover_upper_bounds"]["depth"] == 5


def test_verify_bad_ratio(capsys):
    code, out, err = run(capsys, "verify", scene("bad_ratio"), "--pairs", "5000", "--points", "5000")
    assert code == 4
    assert "L" in err
    rep = json.loads(out)
    assert rep["validator"]["L"]["pass"] is False
    assert len(rep["validator"]["L"]["violations"]) >= 1
    assert rep["validator"]["R"]["pass"] is True


def test_verify_finite_attractor(capsys):
    code, out, _ = run(capsys, "verify", scene("two_points"), "--pairs", "2000", "--points", "2000")
    rep = json.loads(out)
    assert code == 0 and rep["x0"] == 0 and rep["boxdim"]["slope"] is None


def test_verify_is_deterministic(capsys, tmp_path, monkeypatch):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    run(capsys, "verify", scene("weak"), "--out", str(a), "--pairs", "20000", "--points", "20000")
    monkeypatch.setenv("WCDIM_THREADS", "4")
    run(capsys, "verify", scene("weak"), "--out", str(b), "--pairs", "20000", "--points", "20000")
    assert a.read_bytes() == b.read_bytes()


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "wcdim", "bound", scene("halves")], capture_output=True, text=True)
    assert res.returncode == 0 and float(res.stdout) == pytest.approx(1.0, abs=1e-12)
