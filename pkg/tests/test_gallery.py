import json
from fractions import Fraction as F

from constructive_lp import machines as mc
from constructive_lp.gallery import UNDECIDABLE, doubling_schedule, run_gallery, run_instance, Report


def test_doubling_schedule():
    assert doubling_schedule(8) == [1, 2, 4, 8]
    assert doubling_schedule(10) == [1, 2, 4, 8, 10]
    assert doubling_schedule(1) == [1]


def test_small_gallery_clean():
    ms = {"h31": mc.halts_at(3, 1), "h40": mc.halts_at(4, 0), "never": mc.never_halts()}
    report = run_gallery(ms, [1, 2], 16)
    assert report.ok, report.mismatches
    assert not report.surprises
    kinds = {r["kind"] for r in report.records}
    assert {"feasibility", "boundedness", "diagnose", "value_bounds", "locate"} <= kinds


def test_never_halts_undecidable_rows_unknown():
    report = run_gallery({"never": mc.never_halts()}, [1], 64)
    for r in report.records:
        if (r["family"], r["kind"]) in UNDECIDABLE:
            assert r["verdict"] == "unknown"


def test_library_machines_clean():
    report = run_gallery(mc.library(), [0, 1, 4], 16, families=["P", "H", "R"])
    assert report.ok, report.mismatches


def test_h_records_carry_value_approx():
    report = Report()
    run_instance("H", "m", mc.halts_at(3, 1), 2, [1, 4], report)
    approx = {r["value_approx"] for r in report.records if "value_approx" in r}
    assert approx == {F(9, 8)}


def test_records_serialise():
    report = run_gallery({"m": mc.halts_at(3, 1)}, [2], 4, families=["T"])
    for line in report.lines():
        rec = json.loads(line)
        assert rec["family"] == "T" and "note" in rec
        assert isinstance(rec["wall_ms"], float)
