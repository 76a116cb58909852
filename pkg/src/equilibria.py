"""Equilibria, release thresholds and stability classification."""

import logging
import math

import numpy as np

from src.config import settings
from src.errors import ExistenceError, InvalidInputError, NotApplicableError
from src.model_core import jacobian
from src.models import (
    DulacReport,
    Eigenvalue,
    Equilibrium,
    Jacobian2,
    NormalizedParams,
    OriginalParams,
    Params,
    StabilityClass,
    State,
    SystemKind,
    Thresholds,
)
from src.normal_forms import focus_quantity, saddle_node_coefficients

logger = logging.getLogger(__name__)


def y3_of(k: float, eps: float | None = None) -> float:
    """Positive root of 1/(1 + k y) - y = 0, i.e. (sqrt(1 + 4k) - 1)/(2k).

    Evaluated in the rationalized form 2/(1 + sqrt(1 + 4k)); below ``eps`` the
    series 1 - k + 2k^2 is used.
    """
    if not math.isfinite(k) or k < 0:
        raise InvalidInputError(f"Inhibition level must be finite and >= 0, got {k}")
    eps = settings.k_series_eps if eps is None else eps
    if k <= eps:
        return 1.0 - k + 2.0 * k * k
    return 2.0 / (1.0 + math.sqrt(1.0 + 4.0 * k))


def y3_original(p: OriginalParams) -> float:
    """Positive root of r/(1 + k y) = c y in original units."""
    return p.r / p.c * y3_of(p.k * p.r / p.c)


def thresholds(p: NormalizedParams) -> Thresholds:
    """u0 = m̄ y3(k̄) and the Hopf value u0/2."""
    y3 = y3_of(p.k)
    u0 = p.m * y3
    return Thresholds(y3=y3, u0=u0, u_hopf=u0 / 2.0)


def classify_linear(j: Jacobian2, tol: float | None = None) -> StabilityClass:
    """Trace-determinant verdict for a 2x2 linearization.

    Zero determinant within the band gives DEGENERATE_OTHER and zero trace
    gives LINEAR_CENTER; both need a nonlinear refinement by the caller.
    """
    entries = (j.j11, j.j12, j.j21, j.j22)
    if not all(math.isfinite(v) for v in entries):
        raise InvalidInputError(f"Jacobian has non-finite entries: {entries}")
    tol = settings.threshold_rel_tol if tol is None else tol

    scale = max(abs(v) for v in entries)
    if scale == 0.0:
        return StabilityClass.DEGENERATE_OTHER
    trace, det = j.trace, j.det

    if det < -tol * scale * scale:
        return StabilityClass.SADDLE
    if det <= tol * scale * scale:
        return StabilityClass.DEGENERATE_OTHER
    if abs(trace) <= tol * scale:
        return StabilityClass.LINEAR_CENTER

    node = trace * trace - 4.0 * det >= 0.0
    if trace < 0:
        return StabilityClass.STABLE_NODE if node else StabilityClass.STABLE_FOCUS
    return StabilityClass.UNSTABLE_NODE if node else StabilityClass.UNSTABLE_FOCUS


def _build(
    name: str, p: Params, location: State, stability: StabilityClass, system: SystemKind
) -> Equilibrium:
    eigenvalues = jacobian(p, location).eigenvalues()
    return Equilibrium(
        name=name,
        location=location,
        stability=stability,
        system=system,
        eigenvalues=(
            Eigenvalue.from_complex(eigenvalues[0]),
            Eigenvalue.from_complex(eigenvalues[1]),
        ),
        unit_system=p.unit_system,
    )


def equilibria_no_release(p: Params) -> list[Equilibrium]:
    """E0 (saddle) and E1 (unstable node or focus) of the model without release."""
    if p.u != 0:
        raise NotApplicableError("The no-release analysis requires u = 0")
    if isinstance(p, OriginalParams):
        r, k, c, m = p.r, p.k, p.c, p.m
    else:
        r, k, c, m = 1.0, p.k, 1.0, p.m

    e0 = State(x=0.0, y=0.0)
    y1 = r / c * y3_of(k * r / c)
    e1 = State(x=m / (c * y1), y=y1)

    return [
        _build("E0", p, e0, classify_linear(jacobian(p, e0)), SystemKind.NO_RELEASE),
        _build("E1", p, e1, classify_linear(jacobian(p, e1)), SystemKind.NO_RELEASE),
    ]


def classify_E2(p: NormalizedParams, tol: float | None = None) -> StabilityClass:
    """Pest-free equilibrium (0, ū/m̄): saddle, stable node, or attracting saddle node."""
    tol = settings.threshold_rel_tol if tol is None else tol
    u0 = thresholds(p).u0
    if p.u < u0 * (1.0 - tol):
        return StabilityClass.SADDLE
    if p.u > u0 * (1.0 + tol):
        return StabilityClass.STABLE_NODE

    logger.debug("E2 inside the saddle-node band: u=%r, u0=%r", p.u, u0)
    quadratic, _ = saddle_node_coefficients(p.k, p.m, p.u / p.m)
    if quadratic > 0:
        return StabilityClass.ATTRACTING_SADDLE_NODE
    logger.warning("Non-positive saddle-node coefficient %r for %r", quadratic, p)
    return StabilityClass.DEGENERATE_OTHER


def classify_E3(p: NormalizedParams, tol: float | None = None) -> StabilityClass:
    """Positive equilibrium: unstable/stable focus, or center type stable focus at u0/2.

    Away from u0/2 the focus/node split follows the discriminant; the theorem's
    focus verdict holds wherever the eigenvalues are complex.
    """
    tol = settings.threshold_rel_tol if tol is None else tol
    th = thresholds(p)
    if p.u >= th.u0 * (1.0 - tol):
        raise ExistenceError(f"E3 exists only for u < u0 = {th.u0!r}, got u = {p.u!r}")

    if abs(p.u - th.u_hopf) <= tol * th.u_hopf:
        logger.debug("E3 inside the Hopf band: u=%r, u_hopf=%r", p.u, th.u_hopf)
        if focus_quantity(p.k, p.m, th.y3) < 0:
            return StabilityClass.CENTER_TYPE_STABLE_FOCUS
        return StabilityClass.DEGENERATE_OTHER

    x3 = (p.m * th.y3 - p.u) / th.y3**2
    trace = p.m - 2.0 * p.u / th.y3
    det = th.y3**2 * x3 * (p.k * th.y3**2 + 1.0)
    node = trace * trace - 4.0 * det >= 0.0
    if p.u < th.u_hopf:
        return StabilityClass.UNSTABLE_NODE if node else StabilityClass.UNSTABLE_FOCUS
    return StabilityClass.STABLE_NODE if node else StabilityClass.STABLE_FOCUS


def equilibria_with_release(p: NormalizedParams, tol: float | None = None) -> list[Equilibrium]:
    """E2 always; E3 as well when ū < u0 (outside the saddle-node band)."""
    tol = settings.threshold_rel_tol if tol is None else tol
    th = thresholds(p)

    found = [
        _build(
            "E2",
            p,
            State(x=0.0, y=p.u / p.m),
            classify_E2(p, tol),
            SystemKind.WITH_RELEASE,
        )
    ]
    if p.u < th.u0 * (1.0 - tol):
        x3 = (p.m * th.y3 - p.u) / th.y3**2
        found.append(
            _build(
                "E3",
                p,
                State(x=x3, y=th.y3),
                classify_E3(p, tol),
                SystemKind.WITH_RELEASE,
            )
        )
    return found


def dulac_certificate(
    p: Params, sample_count: int = 1000, seed: int = 0
) -> DulacReport:
    """Check that B = 1/(xy) makes the weighted divergence equal to c > 0.

    Symbolically d(BP)/dx + d(BQ)/dy = c; the numeric part evaluates central
    differences of B·P and B·Q at random interior points.
    """
    if p.u != 0:
        raise NotApplicableError("The Dulac certificate covers the no-release model only")
    if sample_count < 1:
        raise InvalidInputError("sample_count must be positive")
    if isinstance(p, OriginalParams):
        r, k, c, m = p.r, p.k, p.c, p.m
    else:
        r, k, c, m = 1.0, p.k, 1.0, p.m

    def weighted_p(x: np.ndarray, y: np.ndarray) -> np.ndarray:
        return (r * x / (1.0 + k * y) - c * x * y) / (x * y)

    def weighted_q(x: np.ndarray, y: np.ndarray) -> np.ndarray:
        return (c * x * y * y - m * y) / (x * y)

    rng = np.random.default_rng(seed)
    xs = rng.uniform(0.05, 5.0, sample_count)
    ys = rng.uniform(0.05, 5.0, sample_count)
    hx = settings.fd_step * np.maximum(1.0, xs)
    hy = settings.fd_step * np.maximum(1.0, ys)

    divergence = (weighted_p(xs + hx, ys) - weighted_p(xs - hx, ys)) / (2.0 * hx) + (
        weighted_q(xs, ys + hy) - weighted_q(xs, ys - hy)
    ) / (2.0 * hy)
    deviation = float(np.max(np.abs(divergence - c)))

    return DulacReport(
        symbolic_divergence=c,
        sample_count=sample_count,
        min_divergence=float(divergence.min()),
        max_divergence=float(divergence.max()),
        max_deviation=deviation,
        passed=bool(np.all(divergence > 0) and deviation <= 1e-4),
    )
