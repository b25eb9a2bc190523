import json
import os

import pytest

from pipeline.core import FigureReproducer
from pipeline.targets import Target
from runtime.errors import UsageError


def _report(out_dir):
    with open(os.path.join(out_dir, "report.json"), "r", encoding="utf-8") as fh:
        return json.load(fh)


def test_target_kinds():
    assert Target("t", 100.0, 0.1).passes(109.0)
    assert not Target("t", 100.0, 0.1).passes(111.0)
    assert Target("t", 0.5, 0.02, "absolute").passes(0.48)
    assert Target("t", 0.2, kind="below").passes(0.19)
    assert not Target("t", 0.2, kind="below").passes(0.2)
    assert Target("t", (120.0, 180.0), kind="within").passes(127.0)
    assert not Target("t", 100.0, 0.1).passes(None)


def test_targets_on_the_tolerance_boundary_pass():
    assert Target("t", 0.5, 0.02, "absolute").passes(0.52)
    assert Target("t", 0.3, 0.1, "relative").passes(0.33)
    assert Target("t", 0.3, 0.1, "relative").passes(0.27)
    assert not Target("t", 0.5, 0.02, "absolute").passes(0.5201)


def test_target_check_records_context():
    check = Target("ratio", 0.92, 0.1).check(0.9, mode="kinchin-pease")
    assert check == {"name": "ratio", "value": 0.9, "expected": 0.92, "tolerance": 0.1, "kind": "relative",
                     "passed": True, "mode": "kinchin-pease"}
    assert Target("w", (1.0, 2.0), kind="within").check(1.5)["expected"] == [1.0, 2.0]


def test_unknown_figure(tmp_path):
    with pytest.raises(UsageError):
        FigureReproducer(str(tmp_path)).run("fig2")


def test_reproduce_etalon_round_trip(tmp_path):
    report = FigureReproducer(str(tmp_path), seed=1).run("fig3a")
    assert report["passed"]
    assert len(report["checks"]) == 4
    assert os.path.exists(tmp_path / "fig3a_spectrum.csv")
    assert report["results"]["constructive_wavelengths_nm"]
    assert _report(tmp_path)["meta"]["subcommand"] == "reproduce"


def test_reproduce_threshold(tmp_path):
    report = FigureReproducer(str(tmp_path)).run("threshold")
    assert report["passed"]
    assert 120.0 <= report["results"]["max_fwhm_mhz"] <= 180.0
    assert report["results"]["barrett_kok_gain"] == pytest.approx(100.0)
    assert os.path.exists(tmp_path / "threshold_visibility.csv")


def test_reproduce_statistics(tmp_path):
    fig4 = FigureReproducer(str(tmp_path / "fig4")).run("fig4")
    assert {c["name"] for c in fig4["checks"]} >= {"median_A", "median_C", "fraction_below_A+B"}
    assert fig4["results"]["fits"]["C"]["median"] > fig4["results"]["fits"]["A"]["median"]

    fig5 = FigureReproducer(str(tmp_path / "fig5")).run("fig5")
    overlap = [c for c in fig5["checks"] if c["name"].startswith("no_thickness_trend")]
    assert len(overlap) == 3 and all(c["passed"] for c in overlap)
    assert os.path.exists(tmp_path / "fig5" / "fig5_regions.xlsx")


def test_seeded_reports_repeat(tmp_path):
    a = FigureReproducer(str(tmp_path / "a"), seed=4).run("fig4")
    b = FigureReproducer(str(tmp_path / "b"), seed=4).run("fig4")
    assert a["results"]["fits"] == b["results"]["fits"]
    assert _report(tmp_path / "a")["meta"]["config_hash"] == _report(tmp_path / "b")["meta"]["config_hash"]


@pytest.mark.slow
def test_reproduce_ple(tmp_path):
    report = FigureReproducer(str(tmp_path)).run("fig3b")
    assert report["passed"]


@pytest.mark.slow
def test_reproduce_depth_profiles(tmp_path):
    report = FigureReproducer(str(tmp_path), n_ions=2000, workers=2).run("fig1b")
    assert len(report["checks"]) == 14
    assert all(c["passed"] for c in report["checks"] if c["name"].startswith("relative_vacancy"))
