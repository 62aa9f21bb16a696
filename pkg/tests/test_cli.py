import io as _io
import json
from fractions import Fraction as F
from pathlib import Path

import pytest

from compcurve import io
from compcurve.cli import main
from compcurve.exact import DyadicInterval, parse_rational
from compcurve.geometry import P, PathFunction, Polygon

DEMOS = Path(__file__).resolve().parent.parent / "demos"


def run(*argv):
    buf = _io.StringIO()
    rc = main([str(a) for a in argv], buf)
    return rc, buf.getvalue()


def parse_iv(text: str) -> DyadicInterval:
    lo, hi = text.strip().strip("[]").split(",")
    return DyadicInterval(parse_rational(lo.strip()), parse_rational(hi.strip()))


@pytest.fixture
def koch_files(tmp_path):
    for d in (0, 1, 2):
        assert run("build", "koch", "--depth", d, "-o", tmp_path / f"k{d}.curve")[0] == 0
    return tmp_path


def test_build_koch_depth2(koch_files):
    poly = io.load_curve(koch_files / "k2.curve")
    assert isinstance(poly, Polygon) and len(poly) == 17


def test_dist_koch_base(koch_files):
    rc, out = run("dist", koch_files / "k0.curve", koch_files / "k1.curve", "-n", 20)
    assert rc == 0
    iv = parse_iv(out)
    assert iv.contains(F(1, 4)) and iv.width <= F(1, 2 ** 20)


def test_eval_normalized_koch(koch_files):
    rc, out = run("eval", koch_files / "k1.curve", "--t", "1/4", "-n", 20)
    assert rc == 0
    rows = dict(line.split(" ", 1) for line in out.splitlines())
    assert parse_iv(rows["x"]).contains(F(1, 4)) and parse_iv(rows["y"]).contains(F(1, 4))


def test_eval_path_is_exact(tmp_path):
    run("build", "koch-param", "--depth", 1, "-o", tmp_path / "f.curve")
    rc, out = run("eval", tmp_path / "f.curve", "--t", "1/4")
    assert (rc, out.strip()) == (0, "(1/4, 1/4)")


def test_length_and_simple(koch_files, tmp_path):
    rc, out = run("length", koch_files / "k2.curve", "-n", 20)
    assert rc == 0 and parse_iv(out).contains(2)
    assert run("simple", koch_files / "k2.curve")[0] == 0
    io.save(Polygon([P(0, 0), P(1, 1), P(1, 0), P(0, 1)]), tmp_path / "bowtie.curve")
    rc, out = run("simple", tmp_path / "bowtie.curve")
    assert (rc, out.strip()) == (1, "not simple")


def test_sweeps_verb(tmp_path):
    run("build", "retrace", "-o", tmp_path / "r.curve")
    rc, out = run("sweeps", tmp_path / "r.curve", "--eps", "1/2")
    assert rc == 0
    assert out.splitlines()[-1] == "sweeps=1"
    assert "t=(0/1, 1/3, 2/3, 1/1)" in out


def test_pad_build(tmp_path):
    run("build", "segment", "-o", tmp_path / "u.curve")
    rc, out = run("build", "pad", "--in", tmp_path / "u.curve", "--length", 2, "--eps", "1/4",
                  "-o", tmp_path / "p.curve")
    assert rc == 0 and out.startswith("k=8 ")
    assert io.load_curve(tmp_path / "p.curve").exact_length() == 2


def test_leftlen_and_normalize(tmp_path):
    rc, out = run("leftlen", DEMOS / "l_polygon.name", "-n", 4)
    assert rc == 0
    vals = [parse_rational(line.split()[1]) for line in out.splitlines()]
    assert vals == sorted(vals) and vals[-1] <= 2
    rc, out = run("normalize", DEMOS / "l_polygon.name", "--limit", 2, "--shift", 1,
                  "--stage", 2, "-o", tmp_path / "f.curve")
    assert rc == 0 and out.startswith("orientation=")
    assert isinstance(io.load_curve(tmp_path / "f.curve"), PathFunction)


def test_diag_scenario(tmp_path):
    rc, out = run("diag", DEMOS / "k_vs_r.scenario", "-o", tmp_path / "res.json")
    assert rc == 0
    assert all(line.endswith("ok") for line in out.splitlines() if line.startswith("audit "))
    doc = json.loads((tmp_path / "res.json").read_text())
    assert doc["kind"] == "K_vs_R"


def test_diag_is_deterministic():
    assert run("diag", DEMOS / "m_vs_n.scenario") == run("diag", DEMOS / "m_vs_n.scenario")


def test_export_round_trip(koch_files, tmp_path):
    src = koch_files / "k2.curve"
    run("export", src, "-o", tmp_path / "again.curve", "--svg", tmp_path / "k2.svg")
    assert (tmp_path / "again.curve").read_bytes() == src.read_bytes()
    assert (tmp_path / "k2.svg").read_text().lstrip().startswith("<?xml")


def test_export_name_stage(tmp_path):
    rc, _ = run("export", DEMOS / "koch.name", "--stage", 2, "-o", tmp_path / "k.curve")
    assert rc == 0 and len(io.load_curve(tmp_path / "k.curve")) == 17
    assert run("export", DEMOS / "koch.name")[0] == 2


# ---------------------------------------------------------------- exit statuses

def test_usage_errors(tmp_path):
    assert run("dist", tmp_path / "missing.curve", tmp_path / "missing.curve")[0] == 2
    assert run("eval", "x.curve", "--t", "abc")[0] == 2
    assert run("length", "x.curve", "-n", -1)[0] == 2
    assert run("frobnicate")[0] == 2
    (tmp_path / "bad.curve").write_text("{not json")
    assert run("length", tmp_path / "bad.curve")[0] == 2


def test_contract_violation():
    assert run("build", "zsweep", "--delta", 0)[0] == 3
    assert run("build", "koch", "--depth", -1)[0] == 3


def test_budget_exhaustion():
    rc, _ = run("normalize", DEMOS / "l_polygon.name", "--limit", 7, "--shift", 40, "--budget", 4)
    assert rc == 4
