import csv
import io

import numpy as np
import pytest

from approxdepth import bench, cli
from approxdepth.scenes import read_scene, write_queries


def run(argv, capsys=None):
    code = cli.main([str(a) for a in argv])
    return code


@pytest.fixture
def scene_file(tmp_path):
    p = tmp_path / "s.json"
    assert run(["gen", "--family", "halfplanes", "--n", 50, "--seed", 3, "--profile",
                "peak-noise", "-o", p]) == 0
    return p


def test_gen_deterministic(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for p in (a, b):
        assert run(["gen", "--family", "simplices", "--n", 7, "--seed", 1, "-o", p]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert len(read_scene(a)) == 7


def test_verify_ok(scene_file, tmp_path, capsys):
    assert run(["verify", "-i", scene_file, "--epsilon", 0.02, "--m", 200, "--seed", 4]) == 0
    assert "0 sandwich violations" in capsys.readouterr().err


def test_query_csv_and_oracle_columns(scene_file, tmp_path):
    qf, out = tmp_path / "q.csv", tmp_path / "r.csv"
    write_queries(np.random.default_rng(0).uniform(0, 1, (30, 2)), qf)
    assert run(["query", "-i", scene_file, "--queries", qf, "--epsilon", 0.05, "--verify",
                "-o", out]) == 0
    rows = list(csv.DictReader(io.StringIO(out.read_text())))
    assert len(rows) == 30 and all(r["ok"] == "1" for r in rows)


def test_empty_query_file(scene_file, tmp_path):
    qf, out = tmp_path / "q.csv", tmp_path / "r.csv"
    qf.write_text("x,y\n")
    assert run(["query", "-i", scene_file, "--queries", qf, "-o", out]) == 0
    assert out.read_text() == "id,x,y,d_minus,d_plus\n"


def test_corrupted_structure_exit_3(scene_file, monkeypatch):
    real = bench.build_structure

    class Broken:
        def __init__(self, st):
            self.st = st

        def query_many(self, Q):
            lo, hi = self.st.query_many(Q)
            return lo + 1, hi

    monkeypatch.setattr(bench, "build_structure", lambda *a, **k: Broken(real(*a, **k)))
    assert run(["verify", "-i", scene_file, "--epsilon", 0.05, "--m", 50]) == 3


def test_usage_and_validation_codes(tmp_path, scene_file):
    assert run(["frobnicate"]) == 1
    assert run([]) == 1
    assert run(["query"]) == 1
    assert run(["query", "-i", tmp_path / "missing.json"]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    assert run(["build", "-i", bad]) == 2
    assert run(["build", "-i", scene_file, "--epsilon", 3]) == 2
    assert run(["query", "-i", scene_file, "--structure", "triangle"]) == 2
    qf = tmp_path / "q.csv"
    qf.write_text("x,y\n1.5,0.5\n")
    assert run(["query", "-i", scene_file, "--queries", qf]) == 2


def test_build_maxdepth_bench(scene_file, tmp_path):
    for verb, extra in (("build", []), ("maxdepth", [])):
        out = tmp_path / f"{verb}.out"
        assert run([verb, "-i", scene_file, "--epsilon", 0.05, "-o", out] + extra) == 0
        assert out.stat().st_size > 0
    out = tmp_path / "bench.csv"
    assert run(["bench", "--family", "halfplanes", "--vary", "n", "--values", "20,40",
                "--m", 100, "--epsilon", 0.05, "--repeat", 1, "-o", out]) == 0
    assert len(out.read_text().splitlines()) == 3


def test_render_deterministic(scene_file, tmp_path):
    a, b = tmp_path / "a.ppm", tmp_path / "b.ppm"
    for p in (a, b):
        assert run(["render", "-i", scene_file, "--epsilon", 0.05, "--resolution", 32,
                    "-o", p]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert a.read_bytes().startswith(b"P6\n32 32\n")
