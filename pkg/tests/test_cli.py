import io
import json
from pathlib import Path

import pytest

from constructive_lp.cli import main

ROOT = Path(__file__).resolve().parent.parent


def run(*argv):
    out = io.StringIO()
    code = main([str(a) for a in argv], out)
    return code, out.getvalue()


@pytest.mark.parametrize(
    "expr,eps,bind,expected",
    [
        ("max(1+s(M,1), 1-s(M,1))", "1/1000", "M=halts_at(3,1)", ["9/8", "1.125"]),
        ("1/3 + 1/6", "1/7", None, ["1/2", "0.5"]),
        ("s(N,1)", "1/1048576", "N=never_halts", ["0", "0.0000000"]),
    ],
)
def test_approx(expr, eps, bind, expected):
    args = ["approx", expr, "--eps", eps] + (["--bind", bind] if bind else [])
    code, out = run(*args)
    assert code == 0
    assert out.split() == expected


def test_approx_with_machine_dir():
    code, out = run("approx", "s(halts_at_4_0,2)", "--eps", "1/100", "--machines", ROOT / "machines")
    assert code == 0 and out.split()[0] == "-1/16"


def test_approx_errors():
    assert run("approx", "s(Q,1)", "--eps", "1/2")[0] == 1
    assert run("approx", "1/0", "--eps", "1/2")[0] == 1
    assert run("approx", "1", "--eps", "0")[0] == 1


def test_solve_rational(tmp_path):
    f = tmp_path / "lp.clp"
    f.write_text("max 3*x + 5*y\nst x <= 4, 2*y <= 12, 3*x + 2*y <= 18, x >= 0, y >= 0\n")
    code, out = run("solve-rational", f)
    rec = json.loads(out)
    assert code == 0 and rec["status"] == "optimal" and rec["value"] == "36"


def test_solve_rational_refuses_machine_problems():
    assert run("solve-rational", ROOT / "problems" / "family_p.clp")[0] == 1


def test_analyze_family_p_with_plan():
    code, out = run("analyze", ROOT / "problems" / "family_p.clp", "--fuel", 4, "--plan", "x=1")
    recs = {r["kind"]: r for r in map(json.loads, out.splitlines())}
    assert code == 0
    assert recs["feasibility"]["verdict"] == "feasible"
    assert recs["plan_feasible"]["verdict"] is False
    assert recs["value_bounds"]["bounds"] == ["0", "0"]


def test_analyze_undecided_stays_unknown():
    code, out = run("analyze", ROOT / "problems" / "family_r.clp", "--fuel", 32)
    recs = {r["kind"]: r for r in map(json.loads, out.splitlines())}
    assert code == 0 and recs["feasibility"]["verdict"] == "unknown"


def test_analyze_errors(tmp_path):
    bad = tmp_path / "bad.clp"
    bad.write_text("max x ; st x/0 = 1\n")
    assert run("analyze", bad, "--fuel", 1)[0] == 1
    assert run("analyze", tmp_path / "missing.clp", "--fuel", 1)[0] == 1
    assert run("analyze", ROOT / "problems" / "family_p.clp", "--fuel", 1, "--plan", "y=1")[0] == 1
    assert run("analyze", ROOT / "problems" / "family_p.clp")[0] == 1


def test_unbound_machine_from_bind(tmp_path):
    f = tmp_path / "p.clp"
    f.write_text("max x\nst s(M,2)*x = 0, x <= 1, x >= 0\n")
    assert run("analyze", f, "--fuel", 1)[0] == 1
    code, out = run("analyze", f, "--fuel", 4, "--bind", "M=halts_at(3,1)")
    assert code == 0


def test_gallery_empty_dir(tmp_path):
    code, out = run("gallery", "--machines", tmp_path, "--n-max", 2, "--fuel", 8)
    assert code == 0 and out == ""


def test_gallery_reports_load_errors(tmp_path):
    (tmp_path / "broken.json").write_text('{"registers": 1, "code": [["INC", 0]]}')
    code, out = run("gallery", "--machines", tmp_path, "--fuel", 2)
    recs = [json.loads(l) for l in out.splitlines()]
    assert code == 0 and [r["kind"] for r in recs] == ["load_error"]


def test_gallery_deterministic(tmp_path):
    args = ["gallery", "--machines", ROOT / "machines", "--n-max", 2, "--fuel", 16, "--no-time"]
    code1, out1 = run(*args)
    code2, out2 = run(*args)
    assert code1 == code2 == 0
    assert out1 == out2 and out1


def test_order():
    assert run("order", "2/7", "3/7")[1].strip() == "less"
    code, out = run("order", "0", "s(M,3)", "--bind", "M=halts_at(5,1)")
    assert out.strip() == "less"
    code, out = run("order", "0", "s(N,3)", "--bind", "N=never_halts", "--max-fuel", 10)
    assert code == 0 and out.startswith("unknown")


def test_usage_errors():
    assert run()[0] == 1
    assert run("frobnicate")[0] == 1
    assert run("gallery", "--machines", "/nonexistent", "--fuel", 1)[0] == 1
