"""Tests for the command-line interface."""

import csv
import json
import math

import numpy as np
import pytest

import src.cli as cli
from src.cli import (
    EXIT_CONSISTENCY,
    EXIT_NUMERICAL,
    EXIT_OK,
    EXIT_USAGE,
    UsageError,
    main,
    parse_u_range,
)
from src.errors import ConsistencyError, IntegrationError
from src.models import Trajectory, UnitSystem


def _read_csv(path):
    with path.open(encoding="utf-8", newline="") as fh:
        return list(csv.DictReader(fh))


def _by_name(equilibria):
    return {eq["name"]: eq for eq in equilibria}


# ============================================================================
# analyze
# ============================================================================


def test_analyze_normalized(capsys):
    """JSON report on stdout with E3 ≈ (0.087, 0.732) a stable focus."""
    assert main(["analyze", "-k", "0.5", "-m", "0.2", "-u", "0.1"]) == EXIT_OK
    report = json.loads(capsys.readouterr().out)
    e3 = _by_name(report["equilibria"])["E3"]
    assert e3["location"]["x"] == pytest.approx(0.087, abs=1e-3)
    assert e3["location"]["y"] == pytest.approx(0.732, abs=1e-3)
    assert e3["stability"] == "stable focus"
    assert report["regime"] == "controlled"
    assert report["hopf"]["alpha1"] < 0


def test_analyze_original_matches_normalized(capsys):
    """The worked example in original units classifies like its normalized form."""
    args = ["analyze", "--original", "-r", "2", "-k", "0.5", "-c", "2", "-m", "0.4", "-u", "0.2"]
    assert main(args) == EXIT_OK
    original = json.loads(capsys.readouterr().out)
    assert main(["analyze", "-k", "0.5", "-m", "0.2", "-u", "0.1"]) == EXIT_OK
    normalized = json.loads(capsys.readouterr().out)

    assert original["unit_system"] == "original"
    assert original["normalized"]["u"] == pytest.approx(0.1)
    for name, eq in _by_name(original["equilibria"]).items():
        assert eq["stability"] == _by_name(normalized["equilibria"])[name]["stability"]


@pytest.mark.parametrize("k, m", [("20", "5"), ("20", "0.001"), ("1e4", "100")])
def test_analyze_strong_inhibition(k, m, capsys):
    """The Hopf cross-check holds far from the worked example."""
    assert main(["analyze", "-k", k, "-m", m, "-u", "0.1"]) == EXIT_OK
    report = json.loads(capsys.readouterr().out)
    assert report["hopf"]["alpha1_numeric"] == pytest.approx(report["hopf"]["alpha1"], rel=1e-6)


def test_analyze_preset_writes_files(tmp_path, capsys):
    """--output-dir adds analysis.json and a manifest."""
    args = ["analyze", "--preset", "example", "-u", "0.1", "--output-dir", str(tmp_path)]
    assert main(args) == EXIT_OK
    stdout = capsys.readouterr().out
    assert (tmp_path / "analysis.json").read_text(encoding="utf-8") == stdout
    manifest = json.loads((tmp_path / "manifest.json").read_text(encoding="utf-8"))
    assert manifest["command"] == "analyze"
    assert manifest["outputs"] == ["analysis.json"]
    assert manifest["tool"] == "nematode-release"


def test_analyze_missing_death_rate(capsys):
    """-m is required: usage error and nothing on stdout."""
    assert main(["analyze", "-k", "0.5"]) == EXIT_USAGE
    assert capsys.readouterr().out == ""


def test_analyze_conflicting_unit_flags(capsys):
    """--original and --normalized are mutually exclusive."""
    assert main(["analyze", "--original", "--normalized", "-m", "0.2"]) == EXIT_USAGE
    assert capsys.readouterr().out == ""


def test_analyze_original_flag_without_original(capsys):
    """-r without --original is rejected."""
    assert main(["analyze", "-r", "2", "-m", "0.2"]) == EXIT_USAGE


def test_analyze_invalid_parameter(capsys):
    """A non-positive death rate fails validation."""
    assert main(["analyze", "-k", "0.5", "-m", "-0.2"]) == EXIT_USAGE


# ============================================================================
# simulate
# ============================================================================


def test_simulate_at_hopf_oscillates(tmp_path, capsys):
    """At ū ≈ u0/2 the trajectory keeps circling E3."""
    args = ["simulate", "-k", "0.5", "-m", "0.2", "-u", "0.0732051", "--x0", "0.2", "--y0", "0.8"]
    assert main([*args, "--t-end", "300", "--output-dir", str(tmp_path)]) == EXIT_OK

    path = tmp_path / "trajectory.csv"
    assert str(path) in capsys.readouterr().out
    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "t,x,y"
    data = np.loadtxt(path, delimiter=",", skiprows=1)
    assert data.shape == (6001, 3)
    tail = data[data.shape[0] // 2 :, 1]
    assert tail.max() - tail.min() > 1e-3
    assert tail.mean() == pytest.approx(0.137, abs=0.02)

    manifest = json.loads((tmp_path / "manifest.json").read_text(encoding="utf-8"))
    assert manifest["partial"] is False
    assert manifest["tolerances"]["t_end"] == 300.0


def test_simulate_is_reproducible(tmp_path):
    """Two identical runs write identical CSV bytes."""
    args = ["simulate", "-k", "0.5", "-m", "0.2", "-u", "0.1", "--x0", "0.3", "--y0", "0.9"]
    args += ["--t-end", "50"]
    assert main([*args, "--output-dir", str(tmp_path / "a")]) == EXIT_OK
    assert main([*args, "--output-dir", str(tmp_path / "b")]) == EXIT_OK
    first = (tmp_path / "a" / "trajectory.csv").read_bytes()
    assert first == (tmp_path / "b" / "trajectory.csv").read_bytes()
    assert b"\r\n" not in first


def test_simulate_svg(tmp_path):
    """--svg renders a phase portrait next to the CSV."""
    args = ["simulate", "-k", "0.5", "-m", "0.2", "-u", "0.1", "--x0", "0.3", "--y0", "0.9"]
    assert main([*args, "--t-end", "50", "--svg", "--output-dir", str(tmp_path)]) == EXIT_OK
    svg = (tmp_path / "portrait.svg").read_text(encoding="utf-8")
    assert svg.lstrip().startswith("<?xml")
    assert "<svg" in svg


def test_simulate_rejects_non_positive_horizon(tmp_path):
    """--t-end 0 is a usage error."""
    args = ["simulate", "-k", "0.5", "-m", "0.2", "--x0", "0.3", "--y0", "0.9", "--t-end", "0"]
    assert main([*args, "--output-dir", str(tmp_path)]) == EXIT_USAGE
    assert not (tmp_path / "trajectory.csv").exists()


def test_simulate_rejects_negative_start(tmp_path):
    """Initial states must lie in the first quadrant."""
    args = ["simulate", "-k", "0.5", "-m", "0.2", "--x0", "-0.3", "--y0", "0.9"]
    assert main([*args, "--output-dir", str(tmp_path)]) == EXIT_USAGE


def test_simulate_integration_failure(tmp_path, monkeypatch):
    """Underflow exits 3 and keeps the partial trajectory."""
    def failing(p, s0, cfg=None):
        partial = Trajectory(
            times=np.array([0.0, 0.05]),
            states=np.array([[s0.x, s0.y], [s0.x, s0.y]]),
            unit_system=UnitSystem.NORMALIZED,
            params=p,
            complete=False,
        )
        raise IntegrationError("step size underflow at t=0.05", partial=partial)

    monkeypatch.setattr(cli, "integrate", failing)
    args = ["simulate", "-k", "0.5", "-m", "0.2", "--x0", "0.3", "--y0", "0.9"]
    assert main([*args, "--output-dir", str(tmp_path)]) == EXIT_NUMERICAL
    assert len(_read_csv(tmp_path / "trajectory.csv")) == 2
    manifest = json.loads((tmp_path / "manifest.json").read_text(encoding="utf-8"))
    assert manifest["partial"] is True
    assert "underflow" in manifest["error"]


# ============================================================================
# portrait
# ============================================================================


def test_portrait_grid(tmp_path, capsys):
    """Default 3x4 grid writes twelve trajectories, an index and an SVG."""
    args = ["portrait", "-k", "0.5", "-m", "0.2", "-u", "0.2", "--t-end", "100", "--dt", "0.1"]
    assert main([*args, "--svg", "--output-dir", str(tmp_path)]) == EXIT_OK
    rows = _read_csv(tmp_path / "index.csv")
    assert len(rows) == 12
    assert [int(row["index"]) for row in rows] == list(range(12))
    assert all(row["complete"] == "true" and row["error"] == "" for row in rows)
    for row in rows:
        assert (tmp_path / row["file"]).exists()
    assert (tmp_path / "portrait.svg").exists()


def test_portrait_explicit_initial_conditions(tmp_path):
    """--ic overrides the grid."""
    args = ["portrait", "-k", "0.5", "-m", "0.2", "-u", "0.1", "--t-end", "20"]
    ics = ["--ic", "0.1", "0.5", "--ic", "0.2", "0.9"]
    assert main([*args, *ics, "--output-dir", str(tmp_path)]) == EXIT_OK
    rows = _read_csv(tmp_path / "index.csv")
    assert [(float(r["x0"]), float(r["y0"])) for r in rows] == [(0.1, 0.5), (0.2, 0.9)]


# ============================================================================
# sweep
# ============================================================================


def test_sweep_range(tmp_path):
    """0.01:0.3:0.01 gives thirty rows sorted by ū."""
    args = ["sweep", "-k", "0.5", "-m", "0.2", "--u-range", "0.01:0.3:0.01"]
    assert main([*args, "--output-dir", str(tmp_path)]) == EXIT_OK
    rows = _read_csv(tmp_path / "sweep.csv")
    assert len(rows) == 30
    u = [float(row["u"]) for row in rows]
    assert u == sorted(u)
    assert rows[0]["regime"] == "below_hopf"
    assert rows[-1]["regime"] == "eliminating"
    assert rows[-1]["e3_exists"] == "false"
    table = json.loads((tmp_path / "sweep.json").read_text(encoding="utf-8"))
    assert len(table["rows"]) == 30


def test_sweep_preset(tmp_path):
    """The worked example yields one row per regime."""
    assert main(["sweep", "--preset", "example", "--output-dir", str(tmp_path)]) == EXIT_OK
    regimes = [row["regime"] for row in _read_csv(tmp_path / "sweep.csv")]
    assert regimes == ["below_hopf", "at_hopf", "controlled", "at_elimination", "eliminating"]


def test_sweep_original_units(tmp_path):
    """Original-unit release rates are converted with ū = c u/r²."""
    args = ["sweep", "--original", "-r", "2", "-k", "0.5", "-c", "2", "-m", "0.4"]
    args += ["--u-values", "0.2", "0.4"]
    assert main([*args, "--output-dir", str(tmp_path)]) == EXIT_OK
    rows = _read_csv(tmp_path / "sweep.csv")
    assert [float(row["u"]) for row in rows] == pytest.approx([0.1, 0.2])
    assert [row["regime"] for row in rows] == ["controlled", "eliminating"]


def test_sweep_needs_values(tmp_path):
    """Without rates there is nothing to sweep."""
    assert main(["sweep", "-k", "0.5", "-m", "0.2", "--output-dir", str(tmp_path)]) == EXIT_USAGE


def test_sweep_malformed_range(tmp_path):
    """A range without a step is a usage error."""
    args = ["sweep", "-k", "0.5", "-m", "0.2", "--u-range", "0.1:0.2"]
    assert main([*args, "--output-dir", str(tmp_path)]) == EXIT_USAGE


def test_parse_u_range():
    """Stop is inclusive; bad specs raise UsageError."""
    values = parse_u_range("0.01:0.3:0.01")
    assert len(values) == 30
    assert values[-1] == pytest.approx(0.3)
    assert parse_u_range("0.5:0.5:0.1") == [0.5]
    for bad in ("0.1:0.2", "a:b:c", "0.3:0.1:0.1", "0.1:0.2:0", "0.1:inf:0.1"):
        with pytest.raises(UsageError):
            parse_u_range(bad)


# ============================================================================
# plan
# ============================================================================


def test_plan_worked_example(capsys):
    """u_elim = 0.4(√3 - 1) ≈ 0.2928, u_control half of it."""
    assert main(["plan", "-r", "2", "-k", "0.5", "-c", "2", "-m", "0.4"]) == EXIT_OK
    plan = json.loads(capsys.readouterr().out)
    assert plan["u_eliminate"] == pytest.approx(0.4 * (math.sqrt(3) - 1), rel=1e-10)
    assert plan["u_control"] == pytest.approx(0.2 * (math.sqrt(3) - 1), rel=1e-10)
    assert plan["published_u_eliminate"] == pytest.approx(0.0732, abs=1e-4)


def test_plan_negative_inhibition(capsys):
    """k < 0 is a usage error."""
    assert main(["plan", "-r", "2", "-k", "-1", "-c", "2", "-m", "0.4"]) == EXIT_USAGE
    assert capsys.readouterr().out == ""


def test_plan_missing_rates(capsys):
    """plan needs r, c and m."""
    assert main(["plan", "-k", "0.5", "-m", "0.4"]) == EXIT_USAGE


def test_plan_consistency_failure(monkeypatch, capsys):
    """A failed cross-check exits 4."""
    def broken(p):
        raise ConsistencyError("closed form and root finder disagree")

    monkeypatch.setattr(cli, "release_plan", broken)
    assert main(["plan", "-r", "2", "-k", "0.5", "-c", "2", "-m", "0.4"]) == EXIT_CONSISTENCY
    assert capsys.readouterr().out == ""


def test_unknown_command():
    """argparse errors map to the usage exit code."""
    assert main(["optimize"]) == EXIT_USAGE
