"""Hopf and saddle-node analysis of the normalized release model.

The first focus quantity α1 at ū = u0/2 is computed twice: from its closed
form, and from the generic 1/16 formula with numerically differentiated
nonlinear terms in the (ξ, η) coordinates where the linear part is
((α, -β), (β, α)). The two must agree.
"""

import logging
import math
from collections.abc import Callable

from src.config import settings
from src.equilibria import thresholds
from src.errors import ConsistencyError, NotApplicableError, NumericalInstabilityError
from src.model_core import jacobian_normalized, rhs_normalized
from src.models import (
    HopfReport,
    NormalizedParams,
    SaddleNodeReport,
    StabilityClass,
    State,
)
from src.normal_forms import focus_quantity, saddle_node_coefficients, third_focus_value

logger = logging.getLogger(__name__)

ALPHA1_REL_TOL = 1e-6

# Central-difference stencils (offsets, weights) for derivative orders 0..3.
_STENCILS: dict[int, tuple[tuple[int, ...], tuple[float, ...]]] = {
    0: ((0,), (1.0,)),
    1: ((-1, 1), (-0.5, 0.5)),
    2: ((-1, 0, 1), (1.0, -2.0, 1.0)),
    3: ((-2, -1, 1, 2), (-0.5, 1.0, -1.0, 0.5)),
}

# Base steps relative to the local scales of ξ and η. Roundoff grows like
# h^-order, so higher orders start from larger steps.
_STEP_BY_ORDER = {2: 0.03, 3: 0.06}
RICHARDSON_LEVELS = 2
RICHARDSON_SETTLE_TOL = 1e-4

_PARTIALS = ("xxx", "xyy", "xxy", "yyy", "xx", "xy", "yy")


def alpha_of_u(p: NormalizedParams, u: float) -> float:
    """Half the trace of J(E3) at release rate ``u`` (= m̄/2 - u/y3)."""
    th = thresholds(p)
    x3 = (p.m * th.y3 - u) / th.y3**2
    return 0.5 * jacobian_normalized(p.with_release(u), State(x=x3, y=th.y3)).trace


def alpha_prime_numeric(p: NormalizedParams, step: float | None = None) -> float:
    """Central difference of :func:`alpha_of_u` at u0/2."""
    u_c = thresholds(p).u_hopf
    h = (settings.fd_step if step is None else step) * u_c
    return (alpha_of_u(p, u_c + h) - alpha_of_u(p, u_c - h)) / (2.0 * h)


def _mixed_partial(
    fun: Callable[[float, float], float], i: int, j: int, h: float
) -> float:
    offsets_i, weights_i = _STENCILS[i]
    offsets_j, weights_j = _STENCILS[j]
    total = 0.0
    for a, wa in zip(offsets_i, weights_i):
        for b, wb in zip(offsets_j, weights_j):
            total += wa * wb * fun(a * h, b * h)
    return total / h ** (i + j)


def _richardson_partial(fun: Callable[[float, float], float], i: int, j: int) -> float:
    """Romberg-refined central difference of an O(1) function of O(1) arguments."""
    h = _STEP_BY_ORDER[i + j]
    estimates = [_mixed_partial(fun, i, j, h / 2.0**n) for n in range(RICHARDSON_LEVELS + 1)]
    previous = estimates[-1]
    for level in range(1, RICHARDSON_LEVELS + 1):
        factor = 4.0**level
        previous = estimates[-1]
        estimates = [
            (factor * fine - coarse) / (factor - 1.0)
            for coarse, fine in zip(estimates, estimates[1:])
        ]
    refined = estimates[0]
    if abs(refined - previous) > RICHARDSON_SETTLE_TOL * max(1.0, abs(refined)):
        raise NumericalInstabilityError(
            f"Richardson refinement of d^{i + j}/dξ^{i}dη^{j} did not settle: "
            f"{previous!r} -> {refined!r}"
        )
    return refined


def normal_form_partials(p: NormalizedParams) -> dict[str, float]:
    """Partials of F and G at (ξ, η, ū) = (0, 0, u0/2).

    Keys are ``F_<idx>`` / ``G_<idx>`` with idx over ξ (x) and η (y), e.g.
    ``F_xyy`` = F_ξηη. Also returns the transformation entries N, M and β.

    Differencing runs on F and G rescaled to O(1): ξ in units of x3, η in
    units of y3/M, F by x3 y3 and G by x3 y3²/M. These scales span several
    decades over admissible (k̄, m̄).
    """
    th = thresholds(p)
    y3, u_c = th.y3, th.u_hopf
    x3 = (p.m * y3 - u_c) / y3**2
    at_hopf = p.with_release(u_c)

    jac = jacobian_normalized(at_hopf, State(x=x3, y=y3))
    alpha = 0.5 * jac.trace
    beta = math.sqrt(jac.det - alpha * alpha)
    gain = x3 * (p.k * y3 * y3 + 1.0)
    n_entry = -alpha / gain
    m_entry = beta / gain

    xi_scale = x3
    eta_scale = y3 / m_entry
    f_scale = x3 * y3
    g_scale = x3 * y3 * eta_scale

    def transformed(a: float, b: float) -> tuple[float, float]:
        # (X, Y) = P (ξ, η) with P = ((1, 0), (N, M)); then apply P^-1.
        xi, eta = a * xi_scale, b * eta_scale
        fx, fy = rhs_normalized(at_hopf, x3 + xi, y3 + n_entry * xi + m_entry * eta)
        return fx / f_scale, (fy - n_entry * fx) / m_entry / g_scale

    def big_f(a: float, b: float) -> float:
        return transformed(a, b)[0]

    def big_g(a: float, b: float) -> float:
        return transformed(a, b)[1]

    partials: dict[str, float] = {"N": n_entry, "M": m_entry, "beta": beta}
    for name, fun, scale in (("F", big_f, f_scale), ("G", big_g, g_scale)):
        for idx in _PARTIALS:
            i, j = idx.count("x"), idx.count("y")
            unit = scale / (xi_scale**i * eta_scale**j)
            partials[f"{name}_{idx}"] = _richardson_partial(fun, i, j) * unit
    logger.debug("Normal-form partials for %r: %r", p, partials)
    return partials


def first_lyapunov_numeric(p: NormalizedParams) -> float:
    """α1(u0/2) from the 1/16 formula with finite-difference partials."""
    d = normal_form_partials(p)
    cubic = d["F_xxx"] + d["F_xyy"] + d["G_xxy"] + d["G_yyy"]
    quadratic = (
        d["F_xy"] * (d["F_xx"] + d["F_yy"])
        - d["G_xy"] * (d["G_xx"] + d["G_yy"])
        - d["F_xx"] * d["G_xx"]
        + d["F_yy"] * d["G_yy"]
    )
    return cubic / 16.0 + quadratic / (16.0 * d["beta"])


def hopf_analysis(p: NormalizedParams) -> HopfReport:
    """Transversality, focus quantity and cycle prediction at ū = u0/2.

    The report depends on (k̄, m̄) only; ``p.u`` is ignored.
    """
    th = thresholds(p)
    y3, u_c = th.y3, th.u_hopf
    x3 = (p.m * y3 - u_c) / y3**2
    jac = jacobian_normalized(p.with_release(u_c), State(x=x3, y=y3))

    alpha = 0.5 * jac.trace
    beta = math.sqrt(jac.det - alpha * alpha)
    omega = math.sqrt(x3 * (p.k * y3 * y3 + 1.0))
    alpha_prime = -1.0 / y3

    alpha1 = focus_quantity(p.k, p.m, y3)
    alpha1_numeric = first_lyapunov_numeric(p)
    if not math.isclose(alpha1, alpha1_numeric, rel_tol=ALPHA1_REL_TOL):
        raise ConsistencyError(
            f"Closed-form α1 {alpha1!r} and numeric α1 {alpha1_numeric!r} disagree for {p!r}"
        )
    l1 = -alpha1 / alpha_prime
    stable_cycles = alpha1 < 0

    if stable_cycles:
        verdict = (
            "alpha1 < 0 and l1 < 0: orbitally asymptotically stable periodic orbits "
            "surround E3 for u just below u0/2, where E3 is an unstable focus"
        )
    else:
        verdict = (
            "alpha1 >= 0: bifurcating periodic orbits are unstable and exist for u "
            "just above u0/2"
        )

    return HopfReport(
        u_critical=u_c,
        x3=x3,
        y3=y3,
        alpha=alpha,
        beta=beta,
        alpha_prime=alpha_prime,
        alpha1=alpha1,
        alpha1_numeric=alpha1_numeric,
        l1=l1,
        omega=omega,
        predicted_period=2.0 * math.pi / beta,
        third_focus_value=third_focus_value(p.k, p.m, y3),
        stable_cycles_below_critical=stable_cycles,
        verdict=verdict,
        naming_note=(
            "The published analysis labels this bifurcation 'subcritical'; under the "
            "usual convention a negative first Lyapunov coefficient is called "
            "supercritical. The signs and orbit stability above are what is asserted."
        ),
    )


def predicted_cycle_radius(p: NormalizedParams) -> float:
    """Small-amplitude cycle radius sqrt(-α(ū)/α1) in ξ-coordinates; 0 when none."""
    th = thresholds(p)
    alpha = p.m / 2.0 - p.u / th.y3
    alpha1 = focus_quantity(p.k, p.m, th.y3)
    if alpha <= 0 or alpha1 >= 0:
        return 0.0
    return math.sqrt(-alpha / alpha1)


def saddle_node_normal_form(
    p: NormalizedParams, tol: float | None = None
) -> SaddleNodeReport:
    """Restricted center-manifold dynamics of E2 at ū = u0."""
    tol = settings.threshold_rel_tol if tol is None else tol
    th = thresholds(p)
    if abs(p.u - th.u0) > tol * th.u0:
        raise NotApplicableError(
            f"Saddle-node normal form needs u = u0 = {th.u0!r}, got u = {p.u!r}"
        )
    y2 = p.u / p.m
    quadratic, cubic = saddle_node_coefficients(p.k, p.m, y2)
    verdict = (
        StabilityClass.ATTRACTING_SADDLE_NODE
        if quadratic > 0
        else StabilityClass.DEGENERATE_OTHER
    )
    return SaddleNodeReport(
        u_critical=th.u0,
        y2=y2,
        quadratic_coefficient=quadratic,
        cubic_coefficient=cubic,
        verdict=verdict,
    )
