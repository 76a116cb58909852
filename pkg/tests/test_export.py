"""Tests for CSV, JSON and SVG output."""

import json

import numpy as np

from src.equilibria import equilibria_with_release
from src.export import (
    fmt,
    render_phase_portrait,
    to_json,
    write_json,
    write_sweep_csv,
    write_trajectory_csv,
)
from src.models import Trajectory, UnitSystem
from src.planner import sweep_u
from src.simulator import nullclines


def _trajectory(p):
    times = np.linspace(0.0, 1.0, 5)
    states = np.column_stack([0.1 + 0.01 * times, 0.7 - 0.02 * times])
    return Trajectory(times=times, states=states, unit_system=UnitSystem.NORMALIZED, params=p)


def test_fmt_round_trips():
    """17 significant digits parse back to the same float."""
    for value in (0.1, 1 / 3, 2.0**-40, 123456.789):
        assert float(fmt(value)) == value
    assert fmt(None) == ""


def test_trajectory_csv(tmp_path, example):
    """Header t,x,y, one LF-terminated row per sample."""
    path = write_trajectory_csv(_trajectory(example), tmp_path / "nested" / "traj.csv")
    text = path.read_bytes().decode("utf-8")
    lines = text.split("\n")
    assert lines[0] == "t,x,y"
    assert lines[1] == "0,0.10000000000000001,0.69999999999999996"
    assert len([line for line in lines if line]) == 6
    assert "\r" not in text


def test_to_json_is_canonical(example):
    """Sorted keys, two-space indent, trailing newline."""
    text = to_json({"b": 1, "a": {"d": 2, "c": 3}})
    assert text == '{\n  "a": {\n    "c": 3,\n    "d": 2\n  },\n  "b": 1\n}\n'
    assert json.loads(to_json(example)) == {"k": 0.5, "m": 0.2, "u": 0.0}


def test_write_json(tmp_path, example):
    """write_json writes exactly to_json."""
    path = write_json(example, tmp_path / "params.json")
    assert path.read_text(encoding="utf-8") == to_json(example)


def test_sweep_csv_columns(tmp_path, example):
    """Missing E3 leaves its columns empty."""
    table = sweep_u(example, [0.1, 0.2])
    rows = (write_sweep_csv(table, tmp_path / "sweep.csv")).read_text(encoding="utf-8").splitlines()
    assert rows[0].split(",")[:6] == ["u", "regime", "e2_x", "e2_y", "e2_class", "e3_exists"]
    controlled, eliminating = rows[1].split(","), rows[2].split(",")
    assert controlled[1] == "controlled"
    assert controlled[5] == "true"
    assert controlled[8] == "stable focus"
    assert eliminating[5:9] == ["false", "", "", ""]
    assert eliminating[9:] == ["", ""]


def test_phase_portrait_is_reproducible(tmp_path, example):
    """Rendering the same data twice gives identical SVG bytes."""
    p = example.with_release(0.1)
    args = ([_trajectory(p)], nullclines(p, (0.05, 1.5)), equilibria_with_release(p))
    first = render_phase_portrait(*args, tmp_path / "a.svg", title="test")
    second = render_phase_portrait(*args, tmp_path / "b.svg", title="test")
    assert first.read_bytes() == second.read_bytes()
    assert b"<svg" in first.read_bytes()
