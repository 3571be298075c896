import subprocess
import sys

import numpy as np
import pytest

from patms import (CSData, DetectorRing, Grid2D, PhantomSpec, ScalarField2D, SolverConfig,
                   TimeGrid, make_phantom, reconstruct_baseline_l1, render_image,
                   subsampling_matrix)
from patms.cli import main
from patms.io import read_array, read_metrics_csv, write_array
from patms.wave import wave_operator

SMALL = ["--detectors", "40", "--nt", "40"]


@pytest.fixture
def files(tmp_path):
    f = tmp_path / "f.afb"
    assert main(["phantom", "--nx", "16", "--seed", "3", "--out", str(f)]) == 0
    g = tmp_path / "g.afb"
    assert main(["forward", "--in", str(f), "--out", str(g)] + SMALL) == 0
    return tmp_path, f, g


def test_phantom_file(tmp_path):
    a, b = tmp_path / "a.afb", tmp_path / "b.afb"
    assert main(["phantom", "--kind", "disks", "--seed", "7", "--nx", "100", "--out", str(a)]) == 0
    assert main(["phantom", "--kind", "disks", "--seed", "7", "--nx", "100", "--out", str(b)]) == 0
    assert read_array(a).shape == (200, 200)
    assert a.read_bytes() == b.read_bytes()
    assert np.array_equal(read_array(a), make_phantom(PhantomSpec("disks", 7), Grid2D(100)).values)


def test_usage_errors(capsys, tmp_path):
    with pytest.raises(SystemExit) as e:
        main(["phantom"])
    assert e.value.code == 2
    assert "usage" in capsys.readouterr().err
    with pytest.raises(SystemExit) as e:
        main(["selftest", "--suite", "nonsense"])
    assert e.value.code == 2
    g = tmp_path / "g.afb"
    write_array(g, np.zeros((30, 10)))
    assert main(["measure", "--in", str(g), "--factor", "7", "--out", str(tmp_path / "y.afb")]) == 2


def test_io_errors(tmp_path):
    assert main(["forward", "--in", str(tmp_path / "missing.afb"), "--out", str(tmp_path / "x")]) == 3
    bad = tmp_path / "bad.afb"
    bad.write_bytes(b"AFB1\x02\x00\x00\x00")
    assert main(["render", "--in", str(bad), "--out", str(tmp_path / "x.pgm")]) == 3
    assert main(["phantom", "--out", str(tmp_path / "no" / "dir" / "f.afb")]) == 3


def test_forward_matches_library(files):
    tmp, f, g = files
    grid = Grid2D(16)
    ref = wave_operator(grid, DetectorRing(40), TimeGrid(40, 2 / 16)).forward(read_array(f))
    out = read_array(g)
    assert out.shape == (40, 40) and np.array_equal(out, ref)
    z, zg = tmp / "z.afb", tmp / "zg.afb"
    write_array(z, np.zeros((32, 32)))
    assert main(["forward", "--in", str(z), "--out", str(zg)]) == 0
    assert read_array(zg).shape == (300, 200) and not read_array(zg).any()


def test_measure(files):
    tmp, f, g = files
    y1, a = tmp / "y1.afb", tmp / "A.afb"
    assert main(["measure", "--in", str(g), "--factor", "1", "--out", str(y1)]) == 0
    assert np.array_equal(read_array(y1), read_array(g))
    y2, y3 = tmp / "y2.afb", tmp / "y3.afb"
    args = ["measure", "--in", str(g), "--matrix", "gaussian", "--m", "10", "--seed", "5"]
    assert main(args + ["--save-matrix", str(a), "--out", str(y2)]) == 0
    assert main(args + ["--out", str(y3)]) == 0
    assert y2.read_bytes() == y3.read_bytes()
    assert np.array_equal(read_array(a) @ read_array(g), read_array(y2))


def test_reconstruct_l1_matches_library(files):
    tmp, f, g = files
    y, rec, m = tmp / "y.afb", tmp / "rec.afb", tmp / "m.csv"
    assert main(["measure", "--in", str(g), "--factor", "2", "--out", str(y)]) == 0
    assert main(["reconstruct", "--y", str(y), "--factor", "2", "--detectors", "40",
                 "--method", "l1", "--iters", "15", "--out", str(rec),
                 "--truth", str(f), "--metrics-out", str(m)]) == 0
    grid = Grid2D(16)
    data = CSData(TimeGrid(40, 2 / 16), read_array(y))
    truth = ScalarField2D(grid, read_array(f))
    ref = reconstruct_baseline_l1(data, subsampling_matrix(40, 2), grid, SolverConfig(max_iters=15),
                                  truth=truth)
    assert np.array_equal(read_array(rec), ref.f_hat.values)
    metrics = read_metrics_csv(m)
    assert float(metrics["rel_l2_error"]) == ref.rel_error
    assert metrics["iters_scale_0"] == "15" and metrics["method"] == "l1"


def test_reconstruct_multiscale_outputs(files):
    tmp, f, g = files
    y, A = tmp / "y.afb", tmp / "A.afb"
    assert main(["measure", "--in", str(g), "--factor", "2", "--save-matrix", str(A), "--out", str(y)]) == 0
    fac, m, rec = tmp / "factors", tmp / "m.csv", tmp / "rec.afb"
    assert main(["reconstruct", "--y", str(y), "--matrix", str(A), "--iters", "5", "--truth", str(f),
                 "--save-factors", str(fac), "--metrics-out", str(m), "--out", str(rec)]) == 0
    assert sorted(p.name for p in fac.iterdir()) == ["factor_0.afb", "factor_1.afb", "factor_2.afb"]
    lines = m.read_text().splitlines()
    assert lines[0] == "key,value"
    keys = [line.split(",")[0] for line in lines[1:]]
    assert keys[:4] == ["rel_l2_error", "iters_scale_0", "iters_scale_1", "iters_scale_2"]
    assert read_array(rec).shape == (32, 32)
    assert main(["reconstruct", "--y", str(y), "--matrix", str(A), "--iters", "2", "--scales", "2",
                 "--save-factors", str(tmp / "f2"), "--nx", "16", "--out", str(rec)]) == 0
    assert len(list((tmp / "f2").iterdir())) == 2


def test_reconstruct_dimension_errors(files):
    tmp, f, g = files
    y = tmp / "y.afb"
    assert main(["measure", "--in", str(g), "--factor", "2", "--out", str(y)]) == 0
    out = str(tmp / "r.afb")
    assert main(["reconstruct", "--y", str(y), "--factor", "4", "--detectors", "40", "--out", out]) == 2
    assert main(["reconstruct", "--y", str(y), "--factor", "2", "--detectors", "40", "--method", "l1",
                 "--save-factors", str(tmp / "d"), "--out", out]) == 2


def test_render(files, tmp_path):
    tmp, f, g = files
    p1, p2 = tmp / "a.pgm", tmp / "b.pgm"
    assert main(["render", "--in", str(f), "--out", str(p1), "--crop"]) == 0
    assert main(["render", "--in", str(f), "--out", str(p2), "--crop"]) == 0
    assert p1.read_bytes() == p2.read_bytes()
    assert p1.read_bytes() == render_image(ScalarField2D(Grid2D(16), read_array(f)), "minmax")
    assert main(["render", "--in", str(g), "--norm", "symmetric", "--out", str(p1)]) == 0
    assert p1.read_bytes().startswith(b"P5\n40 40\n65535\n")


def test_selftest_adjoint_suite(capsys):
    assert main(["selftest", "--suite", "adjoint", "--nx", "32"]) == 0
    out = capsys.readouterr().out
    assert "[PASS]" in out and "[FAIL]" not in out


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "patms", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0 and "selftest" in proc.stdout
