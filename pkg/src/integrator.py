"""Dormand-Prince 4(5) integrator with PI step control and dense output.

The 5th-order solution is propagated (local extrapolation), the embedded
4th-order solution gives the error estimate. Steps whose new state leaves the
first quadrant by more than ``abs_tol`` are rejected.
"""

import logging
import math
from collections.abc import Callable
from typing import NamedTuple

import numpy as np

logger = logging.getLogger(__name__)

Field = Callable[[float, np.ndarray], np.ndarray]

# Butcher tableau
C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0])
A = [
    np.array([]),
    np.array([1 / 5]),
    np.array([3 / 40, 9 / 40]),
    np.array([44 / 45, -56 / 15, 32 / 9]),
    np.array([19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]),
    np.array([9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]),
]
B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84])
# Difference between the 5th- and 4th-order weights, FSAL stage included.
E = np.array(
    [71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40]
)
# Quartic dense-output coefficients; y(θ) = y0 + h K^T P [θ, θ², θ³, θ⁴].
P = np.array(
    [
        [1, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432],
        [0, 0, 0, 0],
        [0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799],
        [0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072],
        [0, 127303824393 / 49829197408, -318862633887 / 49829197408, 701980252875 / 199316789632],
        [0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844],
        [0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423],
    ]
)

ORDER = 5
SAFETY = 0.9
MIN_FACTOR = 0.2
MAX_FACTOR = 10.0
PI_BETA = 0.04
PI_EXPONENT = 1.0 / ORDER - 0.75 * PI_BETA
# Accepted steps shorter than this fraction of the span belong to a collapsing
# solution; a failed run drops the samples they produced.
COLLAPSE_FRACTION = 1e-6


class DenseSolution(NamedTuple):
    times: np.ndarray
    states: np.ndarray
    complete: bool
    message: str
    accepted_steps: int
    rejected_steps: int


def sample_grid(t_end: float, dt: float) -> np.ndarray:
    """Uniform output times 0, ..., t_end with spacing at most ``dt``."""
    n = max(1, math.ceil(t_end / dt - 1e-9))
    return np.linspace(0.0, t_end, n + 1)


def _rms_norm(v: np.ndarray) -> float:
    return float(np.sqrt(np.mean(v * v)))


def _initial_step(
    fun: Field, y0: np.ndarray, f0: np.ndarray, rel_tol: float, abs_tol: float
) -> float:
    scale = abs_tol + rel_tol * np.abs(y0)
    d0 = _rms_norm(y0 / scale)
    d1 = _rms_norm(f0 / scale)
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1

    f1 = fun(h0, y0 + h0 * f0)
    d2 = _rms_norm((f1 - f0) / scale) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1.0 / ORDER)
    return min(100.0 * h0, h1)


def _stages(
    fun: Field, t: float, y: np.ndarray, f: np.ndarray, h: float
) -> tuple[np.ndarray, np.ndarray]:
    K = np.empty((7, y.size))
    K[0] = f
    for s in range(1, 6):
        K[s] = fun(t + C[s] * h, y + h * (A[s] @ K[:s]))
    y_new = y + h * (B @ K[:6])
    K[6] = fun(t + h, y_new)
    return K, y_new


def solve_dense(
    fun: Field,
    y0: np.ndarray,
    sample_times: np.ndarray,
    rel_tol: float,
    abs_tol: float,
    max_step: float,
) -> DenseSolution:
    """Integrate from ``sample_times[0]`` to ``sample_times[-1]``.

    States are interpolated onto ``sample_times``. On step-size underflow the
    samples reached so far are returned with ``complete=False``, minus
    those interpolated from steps taken while the step size was collapsing.
    """
    y = np.asarray(y0, dtype=float).copy()
    t = float(sample_times[0])
    t_final = float(sample_times[-1])

    states = np.empty((sample_times.size, y.size))
    states[0] = y
    filled = 1
    trusted = 1
    collapse_step = COLLAPSE_FRACTION * (t_final - t)

    f = fun(t, y)
    h = min(_initial_step(fun, y, f, rel_tol, abs_tol), max_step)
    prev_error = 1e-4
    accepted = rejected = 0

    while filled < sample_times.size:
        min_step = 16.0 * np.spacing(max(abs(t), 1.0))
        h = min(h, max_step, t_final - t)
        if h < min_step:
            message = f"step size underflow at t={t!r} (h={h!r})"
            logger.warning(
                "Integration stopped: %s; dropping %d samples from collapsing steps",
                message,
                filled - trusted,
            )
            partial = np.maximum(states[:trusted], 0.0)
            return DenseSolution(
                sample_times[:trusted].copy(), partial, False, message, accepted, rejected
            )

        K, y_new = _stages(fun, t, y, f, h)
        if not np.all(np.isfinite(K)):
            logger.debug("Non-finite stage at t=%r, h=%r; halving", t, h)
            h *= 0.5
            rejected += 1
            continue
        if np.any(y_new < -abs_tol):
            logger.debug("Positivity rejection at t=%r, h=%r: %r", t, h, y_new)
            h *= 0.5
            rejected += 1
            continue

        scale = abs_tol + rel_tol * np.maximum(np.abs(y), np.abs(y_new))
        error = _rms_norm(h * (E @ K) / scale)

        if error > 1.0:
            h *= max(MIN_FACTOR, SAFETY * error ** (-PI_EXPONENT))
            rejected += 1
            continue

        t_new = t_final if t_final - (t + h) <= min_step else t + h
        Q = K.T @ P
        while filled < sample_times.size and sample_times[filled] <= t_new:
            ts = sample_times[filled]
            if ts == t_new:
                states[filled] = y_new
            else:
                theta = (ts - t) / h
                powers = np.array([theta, theta**2, theta**3, theta**4])
                states[filled] = y + h * (Q @ powers)
            filled += 1

        if h >= collapse_step:
            trusted = filled

        if error == 0.0:
            factor = MAX_FACTOR
        else:
            factor = SAFETY * error ** (-PI_EXPONENT) * prev_error**PI_BETA
            factor = min(MAX_FACTOR, max(MIN_FACTOR, factor))
        prev_error = max(error, 1e-4)

        t, y, f = t_new, y_new, K[6]
        h *= factor
        accepted += 1

    logger.debug("Integration finished: %d accepted, %d rejected steps", accepted, rejected)
    # Round-off negatives on the axes.
    np.maximum(states, 0.0, out=states)
    return DenseSolution(sample_times.copy(), states, True, "", accepted, rejected)
