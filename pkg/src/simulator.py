"""Trajectories, attractor detection and limit-cycle measurement."""

import logging
import math
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor

import numpy as np
from scipy.signal import find_peaks

from src.config import settings
from src.equilibria import thresholds, y3_original
from src.errors import (
    ExistenceError,
    IntegrationError,
    InsufficientDataError,
    InvalidInputError,
    ModelError,
    UnitMismatchError,
)
from src.integrator import sample_grid, solve_dense
from src.model_core import field_function
from src.models import (
    AttractorKind,
    AttractorReport,
    Equilibrium,
    IntegratorConfig,
    NormalizedParams,
    Nullclines,
    OriginalParams,
    Params,
    PeriodEstimate,
    PortraitEntry,
    State,
    Trajectory,
)

logger = logging.getLogger(__name__)

MIN_SAMPLES = 50
EQUILIBRIUM_TOL = 1e-4
AMPLITUDE_REL_VARIATION = 1e-3
AMPLITUDE_PEAKS = 5
MIN_CROSSINGS = 8
# Section crossings only count when the cycle is at least this fraction of the kick.
CROSSING_AMPLITUDE_FLOOR = 0.05
# The last measured cycle must keep this fraction of the first one's excursion.
CYCLE_RETENTION_FLOOR = 0.95


def integrate(p: Params, s0: State, cfg: IntegratorConfig | None = None) -> Trajectory:
    """Integrate the release model from ``s0`` over [0, cfg.t_end].

    Raises IntegrationError on step-size underflow; the samples reached so
    far are attached as ``error.partial``.
    """
    cfg = cfg or IntegratorConfig()
    times = sample_grid(cfg.t_end, cfg.dense_output_dt)
    solution = solve_dense(
        field_function(p),
        s0.as_array(),
        times,
        rel_tol=cfg.rel_tol,
        abs_tol=cfg.abs_tol,
        max_step=cfg.max_step,
    )
    trajectory = Trajectory(
        times=solution.times,
        states=solution.states,
        unit_system=p.unit_system,
        params=p,
        complete=solution.complete,
    )
    logger.debug(
        "Integrated %r from (%r, %r): %d accepted / %d rejected steps",
        p,
        s0.x,
        s0.y,
        solution.accepted_steps,
        solution.rejected_steps,
    )
    if not solution.complete:
        raise IntegrationError(solution.message, partial=trajectory)
    return trajectory


def _refined_extrema(values: np.ndarray, idx: np.ndarray) -> np.ndarray:
    """Parabolic vertex through each sampled extremum and its two neighbours."""
    left, mid, right = values[idx - 1], values[idx], values[idx + 1]
    curvature = left - 2.0 * mid + right
    with np.errstate(divide="ignore", invalid="ignore"):
        shift = np.where(curvature != 0.0, (left - right) ** 2 / (8.0 * curvature), 0.0)
    return mid - shift


def detect_attractor(traj: Trajectory, eq_list: Sequence[Equilibrium]) -> AttractorReport:
    """Classify the terminal behaviour of ``traj``.

    Equilibrium: terminal distance below 1e-4 and no growth of the distance
    over the last quarter. Limit cycle: the last five peak-to-trough
    amplitudes of x vary by less than 1e-3 relative. Anything else is
    undecided.
    """
    n = len(traj)
    if n < MIN_SAMPLES:
        raise InsufficientDataError(
            f"Attractor detection needs at least {MIN_SAMPLES} samples, got {n}"
        )
    for eq in eq_list:
        if eq.unit_system is not traj.unit_system:
            raise UnitMismatchError(
                f"{eq.name} is in {eq.unit_system.value} units, trajectory in "
                f"{traj.unit_system.value} units"
            )

    terminal = traj.states[-1]
    if eq_list:
        distances = [
            math.hypot(terminal[0] - eq.location.x, terminal[1] - eq.location.y)
            for eq in eq_list
        ]
        nearest = int(np.argmin(distances))
        if distances[nearest] < EQUILIBRIUM_TOL:
            target = eq_list[nearest]
            tail = traj.states[3 * n // 4 :] - target.location.as_array()
            spread = np.hypot(tail[:, 0], tail[:, 1])
            half = spread.size // 2
            early, late = float(spread[:half].max()), float(spread[half:].max())
            if late <= early:
                return AttractorReport(
                    kind=AttractorKind.EQUILIBRIUM,
                    target=target,
                    evidence={
                        "terminal_distance": distances[nearest],
                        "last_quarter_early_max": early,
                        "last_quarter_late_max": late,
                    },
                )

    # Peak statistics on the post-transient half.
    start = n // 2
    x = traj.x[start:]
    y = traj.y[start:]
    peaks, _ = find_peaks(x)
    troughs, _ = find_peaks(-x)
    pairs = min(peaks.size, troughs.size)
    evidence: dict[str, float] = {"peaks": float(peaks.size), "troughs": float(troughs.size)}

    if pairs >= AMPLITUDE_PEAKS:
        peak_idx = peaks[-AMPLITUDE_PEAKS:]
        trough_idx = troughs[-AMPLITUDE_PEAKS:]
        amplitudes = _refined_extrema(x, peak_idx) - _refined_extrema(x, trough_idx)
        mean_amplitude = float(amplitudes.mean())
        if mean_amplitude > 0:
            variation = float((amplitudes.max() - amplitudes.min()) / mean_amplitude)
            evidence["amplitude_variation"] = variation
            if variation < AMPLITUDE_REL_VARIATION:
                t = traj.times[start:]
                period = float(np.mean(np.diff(t[peak_idx])))
                window = slice(int(peak_idx[0]), None)
                return AttractorReport(
                    kind=AttractorKind.LIMIT_CYCLE,
                    period=period,
                    amplitude_x=mean_amplitude,
                    amplitude_y=float(y[window].max() - y[window].min()),
                    evidence=evidence,
                )

    return AttractorReport(kind=AttractorKind.UNDECIDED, evidence=evidence)


def positive_equilibrium(p: Params) -> State:
    """Location of E3 in the units of ``p``."""
    if isinstance(p, OriginalParams):
        y3 = y3_original(p)
        x3 = (p.m * y3 - p.u) / (p.c * y3 * y3)
    else:
        y3 = thresholds(p).y3
        x3 = (p.m * y3 - p.u) / (y3 * y3)
    if x3 <= 0:
        raise ExistenceError(f"No positive equilibrium for {p!r}")
    return State(x=x3, y=y3)


def section_crossings(times: np.ndarray, y: np.ndarray, level: float) -> np.ndarray:
    """Times of upward crossings of y = level, linearly interpolated."""
    d = y - level
    idx = np.flatnonzero((d[:-1] < 0.0) & (d[1:] >= 0.0))
    t0, t1 = times[idx], times[idx + 1]
    return t0 + (t1 - t0) * (-d[idx]) / (d[idx + 1] - d[idx])


def cycle_excursions(
    times: np.ndarray, y: np.ndarray, level: float, crossings: np.ndarray
) -> np.ndarray:
    """Largest |y - level| within each interval between consecutive crossings."""
    edges = np.searchsorted(times, crossings)
    return np.array(
        [np.max(np.abs(y[a:b] - level)) for a, b in zip(edges[:-1], edges[1:])]
    )


def measure_period(traj: Trajectory, level: float, min_amplitude: float = 0.0) -> PeriodEstimate:
    """Period from upward crossings of y = level over the second half of ``traj``.

    Spirals whose excursions shrink from cycle to cycle are rejected: they
    approach an equilibrium, not a periodic orbit.
    """
    start = len(traj) // 2
    times, y = traj.times[start:], traj.y[start:]
    excursion = float(np.max(np.abs(y - level))) if y.size else 0.0
    if excursion < min_amplitude:
        raise InsufficientDataError(
            f"No sustained oscillation: excursion {excursion!r} below {min_amplitude!r}"
        )
    crossings = section_crossings(times, y, level)
    if crossings.size < MIN_CROSSINGS:
        raise InsufficientDataError(
            f"Need at least {MIN_CROSSINGS} section crossings, found {crossings.size}"
        )
    excursions = cycle_excursions(times, y, level, crossings)
    if excursions[-1] < CYCLE_RETENTION_FLOOR * excursions[0]:
        raise InsufficientDataError(
            f"Oscillation is decaying: excursion {excursions[0]!r} -> {excursions[-1]!r} "
            f"over {excursions.size} cycles"
        )
    spacings = np.diff(crossings)
    return PeriodEstimate(
        mean=float(spacings.mean()),
        spread=float(spacings.std()),
        crossings=int(crossings.size),
    )


def limit_cycle_period(
    p: Params, radius: float, cfg: IntegratorConfig | None = None
) -> PeriodEstimate:
    """Kick E3 by ``radius`` in x, integrate, and time the returns to y = y3."""
    if not math.isfinite(radius) or radius <= 0:
        raise InvalidInputError(f"Perturbation radius must be positive, got {radius!r}")
    e3 = positive_equilibrium(p)
    traj = integrate(p, State(x=e3.x + radius, y=e3.y), cfg)
    estimate = measure_period(traj, e3.y, min_amplitude=CROSSING_AMPLITUDE_FLOOR * radius)
    logger.info("Limit-cycle period for %r: %r", p, estimate)
    return estimate


def nullclines(
    p: NormalizedParams, y_range: tuple[float, float], samples: int = 200
) -> Nullclines:
    """x-nullcline (x = 0 and y = y3) and y-nullcline x = (m̄y - ū)/y² as polylines."""
    y_min, y_max = y_range
    if not (0 < y_min < y_max) or not math.isfinite(y_max):
        raise InvalidInputError(f"y_range must satisfy 0 < y_min < y_max, got {y_range!r}")
    if samples < 2:
        raise InvalidInputError("samples must be at least 2")

    ys = np.linspace(y_min, y_max, samples)
    xs = np.maximum((p.m * ys - p.u) / ys**2, 0.0)
    y3 = thresholds(p).y3
    x_extent = max(float(xs.max()), 1.0)

    return Nullclines(
        x_nullcline=(
            np.array([[0.0, y_min], [0.0, y_max]]),
            np.array([[0.0, y3], [x_extent, y3]]),
        ),
        y_nullcline=np.column_stack([xs, ys]),
    )


def phase_portrait_batch(
    p: Params,
    initial_conditions: Sequence[State],
    cfg: IntegratorConfig | None = None,
    max_workers: int | None = None,
) -> list[PortraitEntry]:
    """Integrate every initial condition; failures are recorded per entry."""
    cfg = cfg or IntegratorConfig()
    workers = max_workers or settings.max_workers

    def run(item: tuple[int, State]) -> PortraitEntry:
        index, s0 = item
        try:
            return PortraitEntry(index=index, initial=s0, trajectory=integrate(p, s0, cfg))
        except IntegrationError as exc:
            return PortraitEntry(index=index, initial=s0, trajectory=exc.partial, error=str(exc))
        except ModelError as exc:
            return PortraitEntry(index=index, initial=s0, error=str(exc))

    items = list(enumerate(initial_conditions))
    if not items:
        return []
    with ThreadPoolExecutor(max_workers=workers) as pool:
        entries = list(pool.map(run, items))
    failed = sum(not entry.ok for entry in entries)
    logger.info("Phase portrait: %d trajectories, %d failed", len(entries), failed)
    return entries
