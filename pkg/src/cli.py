"""Command-line interface: analyze, simulate, portrait, sweep and plan.

Run with ``uv run python -m src.cli <command> ...``. Data goes to stdout or to
files under the output directory; logging goes to stderr.
"""

import logging
import math
import sys
from argparse import ArgumentParser, Namespace
from collections.abc import Sequence
from datetime import datetime, timezone
from pathlib import Path

import numpy as np
from pydantic import ValidationError

from src.config import settings
from src.errors import (
    ConsistencyError,
    IntegrationError,
    InsufficientDataError,
    ModelError,
    NumericalInstabilityError,
)
from src.export import (
    render_phase_portrait,
    to_json,
    write_json,
    write_portrait_index,
    write_sweep_csv,
    write_trajectory_csv,
)
from src.model_core import nondimensionalize
from src.models import (
    Equilibrium,
    IntegratorConfig,
    NormalizedParams,
    Nullclines,
    OriginalParams,
    Params,
    RunManifest,
    State,
    Trajectory,
)
from src.planner import build_analysis_report, release_plan, sweep_u
from src.presets import presets
from src.simulator import integrate, nullclines, phase_portrait_batch

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERICAL = 3
EXIT_CONSISTENCY = 4


class UsageError(Exception):
    """Invalid combination of command-line flags."""


# Argument parsing
def _add_param_flags(ap: ArgumentParser, units: bool = True) -> None:
    if units:
        group = ap.add_mutually_exclusive_group()
        group.add_argument("--original", action="store_true", help="Parameters in original units")
        group.add_argument(
            "--normalized", action="store_true", help="Dimensionless parameters (default)"
        )
    ap.add_argument("-r", type=float, help="Pest birth rate (original units)")
    ap.add_argument("-k", type=float, help="Inhibition level")
    ap.add_argument("-c", type=float, help="Predation/conversion rate (original units)")
    ap.add_argument("-m", type=float, help="Nematode death rate")
    ap.add_argument("-u", type=float, default=0.0, help="Nematode release rate")
    ap.add_argument(
        "--output-dir", type=Path, default=None, help="Directory for data files and manifests"
    )


def _add_integrator_flags(ap: ArgumentParser) -> None:
    ap.add_argument("--t-end", type=float, default=settings.t_end, help="Integration horizon")
    ap.add_argument(
        "--dt", type=float, default=settings.dense_output_dt, help="Output sampling interval"
    )
    ap.add_argument("--rel-tol", type=float, default=settings.rel_tol)
    ap.add_argument("--abs-tol", type=float, default=settings.abs_tol)
    ap.add_argument("--max-step", type=float, default=settings.max_step)


def build_parser() -> ArgumentParser:
    ap = ArgumentParser(prog="nematode-release", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="count", default=0, help="Increase verbosity")
    sub = ap.add_subparsers(dest="command", required=True)

    analyze = sub.add_parser("analyze", help="Equilibria, thresholds and bifurcation reports")
    _add_param_flags(analyze)
    analyze.add_argument("--preset", choices=sorted(presets), help="Use a stored parameter set")

    simulate = sub.add_parser("simulate", help="Integrate one trajectory to CSV")
    _add_param_flags(simulate)
    simulate.add_argument("--x0", type=float, required=True)
    simulate.add_argument("--y0", type=float, required=True)
    simulate.add_argument("--svg", action="store_true", help="Also render an SVG phase portrait")
    _add_integrator_flags(simulate)

    portrait = sub.add_parser("portrait", help="Integrate a grid of initial conditions")
    _add_param_flags(portrait)
    portrait.add_argument(
        "--ic", nargs=2, type=float, action="append", metavar=("X0", "Y0"), help="Initial condition"
    )
    portrait.add_argument("--grid", nargs=2, type=int, default=(3, 4), metavar=("NX", "NY"))
    portrait.add_argument("--x-max", type=float, default=1.0)
    portrait.add_argument("--y-max", type=float, default=1.5)
    portrait.add_argument("--workers", type=int, default=settings.max_workers)
    portrait.add_argument("--svg", action="store_true", help="Also render an SVG phase portrait")
    _add_integrator_flags(portrait)

    sweep = sub.add_parser("sweep", help="Regimes across release rates")
    _add_param_flags(sweep)
    sweep.add_argument("--u-values", nargs="+", type=float, help="Release rates")
    sweep.add_argument("--u-range", help="Release rates as start:stop:step (stop inclusive)")
    sweep.add_argument("--preset", choices=sorted(presets), help="Use a stored parameter set")
    sweep.add_argument("--spot-check", action="store_true", help="Simulate each row")
    sweep.add_argument("--workers", type=int, default=settings.max_workers)
    _add_integrator_flags(sweep)

    plan = sub.add_parser("plan", help="Release rates in original units")
    _add_param_flags(plan, units=False)

    return ap


# Flag interpretation
def parse_u_range(text: str) -> list[float]:
    """start:stop:step with an inclusive stop, e.g. 0.01:0.3:0.01 -> 30 values."""
    parts = text.split(":")
    if len(parts) != 3:
        raise UsageError(f"--u-range must look like start:stop:step, got {text!r}")
    try:
        start, stop, step = (float(v) for v in parts)
    except ValueError as exc:
        raise UsageError(f"--u-range has a non-numeric field: {text!r}") from exc
    if not all(math.isfinite(v) for v in (start, stop, step)) or step <= 0 or stop < start:
        raise UsageError(f"--u-range needs finite start <= stop and step > 0, got {text!r}")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return [start + i * step for i in range(count)]


def _apply_preset(args: Namespace) -> None:
    preset = presets[args.preset]
    if args.original:
        for key, value in preset["original"].items():
            setattr(args, key, value)
    else:
        args.normalized = True
        for key, value in preset["normalized"].items():
            setattr(args, key, value)


def params_from_args(args: Namespace) -> Params:
    if args.m is None:
        raise UsageError("-m is required")
    if getattr(args, "original", False):
        if args.r is None or args.c is None:
            raise UsageError("--original needs -r and -c")
        return OriginalParams(r=args.r, k=args.k or 0.0, c=args.c, m=args.m, u=args.u)
    if args.r is not None or args.c is not None:
        raise UsageError("-r and -c are original-unit flags; pass --original")
    return NormalizedParams(k=args.k or 0.0, m=args.m, u=args.u)


def config_from_args(args: Namespace) -> IntegratorConfig:
    if args.t_end <= 0:
        raise UsageError(f"--t-end must be positive, got {args.t_end!r}")
    return IntegratorConfig(
        rel_tol=args.rel_tol,
        abs_tol=args.abs_tol,
        max_step=args.max_step,
        t_end=args.t_end,
        dense_output_dt=args.dt,
    )


def _output_dir(args: Namespace) -> Path:
    return args.output_dir if args.output_dir is not None else settings.output_dir


def _manifest(
    args: Namespace,
    cfg: IntegratorConfig | None,
    outputs: list[Path],
    partial: bool = False,
    error: str | None = None,
) -> RunManifest:
    parameters = {
        key: (str(value) if isinstance(value, Path) else value)
        for key, value in sorted(vars(args).items())
        if key not in {"verbose", "output_dir"}
    }
    tolerances: dict[str, float] = {"threshold_rel_tol": settings.threshold_rel_tol}
    if cfg is not None:
        tolerances.update(cfg.model_dump())
    return RunManifest(
        command=args.command,
        parameters=parameters,
        tool=settings.app_name,
        version=settings.app_version,
        tolerances=tolerances,
        timestamp=datetime.now(timezone.utc).isoformat(),
        outputs=[path.name for path in outputs],
        partial=partial,
        error=error,
    )


def _plot_nullclines(p: Params, y_max: float) -> Nullclines:
    """Nullclines in the units of ``p``."""
    y_range = (y_max * 1e-3, y_max)
    if isinstance(p, NormalizedParams):
        return nullclines(p, y_range)
    normalized, scale = nondimensionalize(p)
    s = scale.state_scale_y
    nc = nullclines(normalized, (y_range[0] * s, y_range[1] * s))
    to_original = np.array([1.0, 1.0 / s])
    return Nullclines(
        x_nullcline=(nc.x_nullcline[0] * to_original, nc.x_nullcline[1] * to_original),
        y_nullcline=nc.y_nullcline * to_original,
    )


def _render(
    p: Params, trajectories: Sequence[Trajectory], path: Path, title: str
) -> Path:
    equilibria: list[Equilibrium] = build_analysis_report(p).equilibria
    y_top = max(
        [float(t.y.max()) for t in trajectories if len(t)] + [eq.location.y for eq in equilibria]
    )
    return render_phase_portrait(
        trajectories, _plot_nullclines(p, 1.1 * y_top), equilibria, path, title=title
    )


# Commands
def cmd_analyze(args: Namespace) -> int:
    if args.preset:
        _apply_preset(args)
    report = build_analysis_report(params_from_args(args))
    sys.stdout.write(to_json(report))
    if args.output_dir is not None:
        out = write_json(report, args.output_dir / "analysis.json")
        write_json(_manifest(args, None, [out]), args.output_dir / "manifest.json")
    return EXIT_OK


def cmd_simulate(args: Namespace) -> int:
    p = params_from_args(args)
    cfg = config_from_args(args)
    s0 = State(x=args.x0, y=args.y0)
    out_dir = _output_dir(args)
    csv_path = out_dir / "trajectory.csv"

    try:
        traj = integrate(p, s0, cfg)
    except IntegrationError as exc:
        outputs = [write_trajectory_csv(exc.partial, csv_path)] if exc.partial else []
        manifest = _manifest(args, cfg, outputs, partial=True, error=str(exc))
        write_json(manifest, out_dir / "manifest.json")
        raise

    outputs = [write_trajectory_csv(traj, csv_path)]
    if args.svg:
        outputs.append(_render(p, [traj], out_dir / "portrait.svg", "Trajectory"))
    write_json(_manifest(args, cfg, outputs), out_dir / "manifest.json")
    for path in outputs:
        print(path)
    return EXIT_OK


def _initial_conditions(args: Namespace) -> list[State]:
    if args.ic:
        return [State(x=x, y=y) for x, y in args.ic]
    nx, ny = args.grid
    if nx < 1 or ny < 1:
        raise UsageError("--grid needs positive counts")
    xs = np.linspace(args.x_max / nx, args.x_max, nx)
    ys = np.linspace(args.y_max / ny, args.y_max, ny)
    return [State(x=float(x), y=float(y)) for y in ys for x in xs]


def cmd_portrait(args: Namespace) -> int:
    p = params_from_args(args)
    cfg = config_from_args(args)
    out_dir = _output_dir(args)
    entries = phase_portrait_batch(p, _initial_conditions(args), cfg, max_workers=args.workers)

    outputs: list[Path] = []
    names: list[str] = []
    for entry in entries:
        name = f"trajectory_{entry.index:03d}.csv"
        names.append(name if entry.trajectory is not None else "")
        if entry.trajectory is not None:
            outputs.append(write_trajectory_csv(entry.trajectory, out_dir / name))
    outputs.append(write_portrait_index(entries, names, out_dir / "index.csv"))

    failures = [entry for entry in entries if not entry.ok]
    if args.svg:
        drawn = [entry.trajectory for entry in entries if entry.trajectory is not None]
        outputs.append(_render(p, drawn, out_dir / "portrait.svg", "Phase portrait"))

    error = "; ".join(f"#{e.index}: {e.error}" for e in failures) or None
    write_json(
        _manifest(args, cfg, outputs, partial=bool(failures), error=error),
        out_dir / "manifest.json",
    )
    for path in outputs:
        print(path)
    return EXIT_NUMERICAL if failures else EXIT_OK


def cmd_sweep(args: Namespace) -> int:
    u_values: list[float] | None = None
    preset_u: list[float] | None = None
    if args.preset:
        _apply_preset(args)
        preset_u = [case["u"] for case in presets[args.preset]["cases"].values()]
    if args.u_values and args.u_range:
        raise UsageError("Pass either --u-values or --u-range, not both")
    if args.u_values:
        u_values = list(args.u_values)
    elif args.u_range:
        u_values = parse_u_range(args.u_range)
    if not u_values and not preset_u:
        raise UsageError("sweep needs --u-values, --u-range or --preset")

    p = params_from_args(args)
    if isinstance(p, OriginalParams):
        base, _ = nondimensionalize(p)
        if u_values:
            u_values = [p.c * u / p.r**2 for u in u_values]
    else:
        base = p
    # Preset rates are stored in normalized units.
    u_values = u_values or preset_u
    cfg = config_from_args(args) if args.spot_check else None

    table = sweep_u(base, u_values, spot_check=args.spot_check, cfg=cfg, max_workers=args.workers)
    out_dir = _output_dir(args)
    outputs = [
        write_sweep_csv(table, out_dir / "sweep.csv"),
        write_json(table, out_dir / "sweep.json"),
    ]
    write_json(_manifest(args, cfg, outputs), out_dir / "manifest.json")
    for path in outputs:
        print(path)
    return EXIT_OK


def cmd_plan(args: Namespace) -> int:
    if args.r is None or args.c is None or args.m is None:
        raise UsageError("plan needs -r, -c and -m")
    if args.k is not None and args.k < 0:
        raise UsageError(f"-k must be >= 0, got {args.k!r}")
    p = OriginalParams(r=args.r, k=args.k or 0.0, c=args.c, m=args.m)
    plan = release_plan(p)
    sys.stdout.write(to_json(plan))
    if args.output_dir is not None:
        out = write_json(plan, args.output_dir / "plan.json")
        write_json(_manifest(args, None, [out]), args.output_dir / "manifest.json")
    return EXIT_OK


COMMANDS = {
    "analyze": cmd_analyze,
    "simulate": cmd_simulate,
    "portrait": cmd_portrait,
    "sweep": cmd_sweep,
    "plan": cmd_plan,
}


def _configure_logging(verbose: int) -> None:
    if verbose >= 2 or settings.debug:
        level: int | str = logging.DEBUG
    elif verbose == 1:
        level = logging.INFO
    else:
        level = settings.log_level.upper()
    logging.basicConfig(
        stream=sys.stderr,
        level=level,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        force=True,
    )


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    _configure_logging(args.verbose)

    try:
        return COMMANDS[args.command](args)
    except (UsageError, ValidationError) as exc:
        parser.print_usage(sys.stderr)
        logger.error("%s", exc)
        return EXIT_USAGE
    except ConsistencyError as exc:
        logger.error("Internal cross-check failed: %s", exc)
        return EXIT_CONSISTENCY
    except (NumericalInstabilityError, IntegrationError, InsufficientDataError) as exc:
        logger.error("Numerical failure: %s", exc)
        return EXIT_NUMERICAL
    except ModelError as exc:
        logger.error("%s", exc)
        return EXIT_USAGE


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
