"""Release-rate regimes, ū sweeps, release plans and full analysis reports."""

import logging
import math
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor

from scipy.optimize import brentq

from src.bifurcation import hopf_analysis, saddle_node_normal_form
from src.config import settings
from src.equilibria import (
    dulac_certificate,
    equilibria_no_release,
    equilibria_with_release,
    thresholds,
    y3_original,
)
from src.errors import ConsistencyError, InvalidInputError, ModelError
from src.model_core import dimensionalize_equilibrium, nondimensionalize
from src.models import (
    AnalysisReport,
    AttractorKind,
    AttractorReport,
    Equilibrium,
    IntegratorConfig,
    NormalizedParams,
    OriginalParams,
    Params,
    RegimeLabel,
    ReleasePlan,
    ScaleMap,
    State,
    SweepRow,
    SweepTable,
)
from src.simulator import detect_attractor, integrate

logger = logging.getLogger(__name__)

PLAN_REL_TOL = 1e-10
SPOT_CHECK_KICK = 1e-3

# Algebraic decay at u0/2 can pass the cycle test, so a cycle is accepted there too.
_CYCLING_REGIMES = (RegimeLabel.BELOW_HOPF, RegimeLabel.AT_HOPF)
_EXPECTED_TARGET = {
    RegimeLabel.AT_HOPF: "E3",
    RegimeLabel.CONTROLLED: "E3",
    RegimeLabel.AT_ELIMINATION: "E2",
    RegimeLabel.ELIMINATING: "E2",
}


def regime_of(p: NormalizedParams, tol: float | None = None) -> RegimeLabel:
    """Regime of ``p.u`` relative to u0/2 and u0, with relative bands at both."""
    tol = settings.threshold_rel_tol if tol is None else tol
    th = thresholds(p)
    if abs(p.u - th.u_hopf) <= tol * th.u_hopf:
        return RegimeLabel.AT_HOPF
    if abs(p.u - th.u0) <= tol * th.u0:
        return RegimeLabel.AT_ELIMINATION
    if p.u < th.u_hopf:
        return RegimeLabel.BELOW_HOPF
    if p.u < th.u0:
        return RegimeLabel.CONTROLLED
    return RegimeLabel.ELIMINATING


def spot_check_consistent(report: AttractorReport, regime: RegimeLabel) -> bool | None:
    """Whether the simulated attractor is the one ``regime`` predicts.

    Eliminating rows must reach E2 and controlled rows E3; below u0/2 the run
    must leave E3. Undecided runs give None.
    """
    if report.kind is AttractorKind.UNDECIDED:
        return None
    if report.kind is AttractorKind.LIMIT_CYCLE:
        return regime in _CYCLING_REGIMES
    if report.target is None:
        return None
    if regime is RegimeLabel.BELOW_HOPF:
        return report.target.name != "E3"
    return report.target.name == _EXPECTED_TARGET[regime]


def _spot_check(
    p: NormalizedParams, equilibria: list[Equilibrium], cfg: IntegratorConfig
) -> AttractorReport | None:
    e2 = equilibria[0].location
    if len(equilibria) > 1:
        e3 = equilibria[1].location
        s0 = State(x=e3.x + SPOT_CHECK_KICK, y=e3.y)
    else:
        s0 = State(x=0.1, y=e2.y)
    try:
        return detect_attractor(integrate(p, s0, cfg), equilibria)
    except ModelError as exc:
        logger.warning("Spot check failed for u=%r: %s", p.u, exc)
        return None


def sweep_u(
    base: NormalizedParams,
    u_values: Sequence[float],
    spot_check: bool = False,
    cfg: IntegratorConfig | None = None,
    max_workers: int | None = None,
) -> SweepTable:
    """Equilibria, classes and regime for each release rate; rows sorted by ū.

    ``base.u`` is ignored.
    """
    for u in u_values:
        if not math.isfinite(u) or u <= 0:
            raise InvalidInputError(f"Release rates must be finite and positive, got {u!r}")
    cfg = cfg or IntegratorConfig()

    def build_row(u: float) -> SweepRow:
        p = base.with_release(u)
        found = equilibria_with_release(p)
        regime = regime_of(p)
        report = _spot_check(p, found, cfg) if spot_check else None
        return SweepRow(
            u=u,
            e2=found[0],
            e3=found[1] if len(found) > 1 else None,
            regime=regime,
            spot_check=report,
            spot_check_consistent=(
                spot_check_consistent(report, regime) if report is not None else None
            ),
        )

    ordered = sorted(u_values)
    if spot_check and ordered:
        with ThreadPoolExecutor(max_workers=max_workers or settings.max_workers) as pool:
            rows = list(pool.map(build_row, ordered))
    else:
        rows = [build_row(u) for u in ordered]

    logger.info("Swept %d release rates for k=%r, m=%r", len(rows), base.k, base.m)
    return SweepTable(k=base.k, m=base.m, thresholds=thresholds(base), rows=rows)


def published_thresholds(p: OriginalParams) -> tuple[float, float] | None:
    """The printed closed forms c²m/(2kr⁴)(√(1 + 4kr/c) - 1) and half of it."""
    if p.k == 0:
        return None
    u_eliminate = (
        p.c**2 * p.m / (2.0 * p.k * p.r**4) * (math.sqrt(1.0 + 4.0 * p.k * p.r / p.c) - 1.0)
    )
    return u_eliminate, u_eliminate / 2.0


def release_plan(p: OriginalParams) -> ReleasePlan:
    """Elimination and control release rates in original units; ``p.u`` is ignored.

    y3 is the positive root of r/(1 + ky) = cy. It is cross-checked against
    a bracketing root finder and against the normalized threshold mapped
    back with u = r²ū/c.
    """
    y3 = y3_original(p)
    oracle = brentq(
        lambda y: p.r / (1.0 + p.k * y) - p.c * y,
        0.0,
        2.0 * p.r / p.c,
        xtol=1e-15,
        rtol=1e-14,
    )
    if not math.isclose(y3, oracle, rel_tol=PLAN_REL_TOL):
        raise ConsistencyError(f"Closed-form y3 {y3!r} disagrees with root {oracle!r}")

    u_eliminate = p.m * y3
    normalized, _ = nondimensionalize(p.with_release(0.0))
    u_back = thresholds(normalized).u0 * p.r**2 / p.c
    if not math.isclose(u_eliminate, u_back, rel_tol=PLAN_REL_TOL):
        raise ConsistencyError(
            f"Elimination rate {u_eliminate!r} disagrees with normalized threshold {u_back!r}"
        )

    notes = [
        f"Release at u >= {u_eliminate:.12g} drives the pest to extinction; "
        f"the pest-free state (0, {y3:.12g}) is then attracting.",
        f"For {u_eliminate / 2.0:.12g} < u < {u_eliminate:.12g} the pest persists at a "
        "stable positive equilibrium; at u = u_control that equilibrium is a "
        "center type stable focus.",
    ]
    published = published_thresholds(p)
    if published is None:
        notes.append("k = 0: uninhibited model, elimination threshold u = m r/c.")
    else:
        notes.append(
            "The published closed form c^2 m/(2 k r^4)(sqrt(1 + 4 k r/c) - 1) maps "
            "the threshold back with u = (c/r^2) u_bar, which contradicts u_bar = c u/r^2; "
            f"it gives {published[0]:.12g} here instead of {u_eliminate:.12g}."
        )

    return ReleasePlan(
        params=p,
        u_eliminate=u_eliminate,
        u_control=u_eliminate / 2.0,
        y3_original=y3,
        published_u_eliminate=published[0] if published else None,
        published_u_control=published[1] if published else None,
        notes=notes,
    )


def build_analysis_report(p: Params, tol: float | None = None) -> AnalysisReport:
    """Equilibria, thresholds and normal forms of ``p`` in its own units."""
    if isinstance(p, OriginalParams):
        normalized, scale = nondimensionalize(p)
    else:
        normalized, scale = p, ScaleMap(state_scale_y=1.0, time_scale=1.0)

    regime = regime_of(normalized, tol)
    normalized_equilibria = equilibria_with_release(normalized, tol)
    if isinstance(p, OriginalParams):
        equilibria = [dimensionalize_equilibrium(eq, scale) for eq in normalized_equilibria]
    else:
        equilibria = normalized_equilibria

    saddle_node = (
        saddle_node_normal_form(normalized, tol)
        if regime is RegimeLabel.AT_ELIMINATION
        else None
    )
    no_release = dulac = None
    if p.u == 0:
        no_release = equilibria_no_release(p)
        dulac = dulac_certificate(p)

    return AnalysisReport(
        unit_system=p.unit_system,
        params=p.model_dump(),
        normalized=normalized,
        thresholds=thresholds(normalized),
        regime=regime,
        equilibria=equilibria,
        normalized_equilibria=normalized_equilibria,
        hopf=hopf_analysis(normalized),
        saddle_node=saddle_node,
        no_release_equilibria=no_release,
        dulac=dulac,
    )
