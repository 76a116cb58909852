"""CSV, JSON and SVG writers for trajectories, sweeps and reports.

Data files are byte-for-byte reproducible: UTF-8, LF line endings, floats
with 17 significant digits, JSON with sorted keys.
"""

import csv
import json
import logging
from collections.abc import Sequence
from pathlib import Path
from typing import Any

import matplotlib

matplotlib.use("Agg")

from matplotlib import rc_context  # noqa: E402
from matplotlib.figure import Figure  # noqa: E402
from pydantic import BaseModel  # noqa: E402

from src.models import (  # noqa: E402
    Equilibrium,
    Nullclines,
    PortraitEntry,
    SweepTable,
    Trajectory,
)

logger = logging.getLogger(__name__)

SVG_HASH_SALT = "nematode-release"


def fmt(value: float | None) -> str:
    """Round-trippable float text; empty for missing values."""
    return "" if value is None else format(float(value), ".17g")


def _open_text(path: Path):
    path.parent.mkdir(parents=True, exist_ok=True)
    return path.open("w", encoding="utf-8", newline="")


def write_trajectory_csv(traj: Trajectory, path: Path) -> Path:
    """t,x,y rows, one per sample."""
    with _open_text(path) as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["t", "x", "y"])
        for t, (x, y) in zip(traj.times, traj.states):
            writer.writerow([fmt(t), fmt(x), fmt(y)])
    logger.debug("Wrote %d samples to %s", len(traj), path)
    return path


def write_portrait_index(
    entries: Sequence[PortraitEntry], files: Sequence[str], path: Path
) -> Path:
    """One row per portrait trajectory: start point, data file and status."""
    with _open_text(path) as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["index", "x0", "y0", "file", "complete", "error"])
        for entry, name in zip(entries, files):
            complete = entry.trajectory is not None and entry.trajectory.complete
            writer.writerow(
                [
                    entry.index,
                    fmt(entry.initial.x),
                    fmt(entry.initial.y),
                    name,
                    str(complete).lower(),
                    entry.error or "",
                ]
            )
    return path


def _equilibrium_columns(eq: Equilibrium | None) -> list[str]:
    if eq is None:
        return ["false", "", "", ""]
    return ["true", fmt(eq.location.x), fmt(eq.location.y), eq.stability.value]


def write_sweep_csv(table: SweepTable, path: Path) -> Path:
    with _open_text(path) as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(
            [
                "u",
                "regime",
                "e2_x",
                "e2_y",
                "e2_class",
                "e3_exists",
                "e3_x",
                "e3_y",
                "e3_class",
                "spot_check",
                "spot_check_consistent",
            ]
        )
        for row in table.rows:
            spot = row.spot_check.kind.value if row.spot_check else ""
            consistent = (
                "" if row.spot_check_consistent is None else str(row.spot_check_consistent).lower()
            )
            writer.writerow(
                [
                    fmt(row.u),
                    row.regime.value,
                    fmt(row.e2.location.x),
                    fmt(row.e2.location.y),
                    row.e2.stability.value,
                    *_equilibrium_columns(row.e3),
                    spot,
                    consistent,
                ]
            )
    return path


def to_json(document: BaseModel | dict[str, Any]) -> str:
    """Canonical JSON: sorted keys, two-space indent, trailing newline."""
    if isinstance(document, BaseModel):
        document = document.model_dump(mode="json")
    return json.dumps(document, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def write_json(document: BaseModel | dict[str, Any], path: Path) -> Path:
    with _open_text(path) as fh:
        fh.write(to_json(document))
    return path


def render_phase_portrait(
    trajectories: Sequence[Trajectory],
    nullclines: Nullclines | None,
    equilibria: Sequence[Equilibrium],
    path: Path,
    title: str = "",
) -> Path:
    """Trajectories, nullclines and equilibrium markers in the (x, y) plane."""
    path.parent.mkdir(parents=True, exist_ok=True)
    with rc_context({"svg.hashsalt": SVG_HASH_SALT, "svg.fonttype": "none"}):
        fig = Figure(figsize=(6, 6))
        ax = fig.add_subplot(1, 1, 1)
        for traj in trajectories:
            ax.plot(traj.x, traj.y, color="tab:blue", linewidth=0.8)
        if nullclines is not None:
            for line in nullclines.x_nullcline:
                ax.plot(line[:, 0], line[:, 1], color="tab:red", linestyle="--", linewidth=1.0)
            ax.plot(
                nullclines.y_nullcline[:, 0],
                nullclines.y_nullcline[:, 1],
                color="tab:green",
                linestyle="--",
                linewidth=1.0,
            )
        for eq in equilibria:
            filled = eq.stability.is_attracting
            ax.plot(
                eq.location.x,
                eq.location.y,
                marker="o",
                markersize=6,
                color="black",
                markerfacecolor="black" if filled else "white",
            )
            ax.annotate(
                eq.name,
                (eq.location.x, eq.location.y),
                xytext=(4, 4),
                textcoords="offset points",
            )
        ax.set_xlabel("x (pest)")
        ax.set_ylabel("y (nematode)")
        ax.set_xlim(left=0.0)
        ax.set_ylim(bottom=0.0)
        if title:
            ax.set_title(title)
        ax.grid(True, linewidth=0.3)
        fig.savefig(path, format="svg", metadata={"Date": None})
    logger.debug("Rendered phase portrait to %s", path)
    return path
