"""Vector fields, Jacobians and unit maps for the nematode-release model family.

Original units (release model):

    dx/dt = r x / (1 + k y) - c x y
    dy/dt = c x y^2 - m y + u

u = 0 gives the inhibited model without release, and u = 0, k = 0 the
uninhibited baseline. Rescaling ȳ = (c/r) y, τ = r t turns it into

    dx/dτ = x / (1 + k̄ ȳ) - x ȳ
    dȳ/dτ = x ȳ^2 - m̄ ȳ + ū

with k̄ = k r / c, m̄ = m / r, ū = c u / r^2.
"""

import logging
import math
from collections.abc import Callable

import numpy as np

from src.errors import InvalidInputError, UnitMismatchError
from src.models import (
    Eigenvalue,
    Equilibrium,
    Jacobian2,
    NormalizedParams,
    OriginalParams,
    Params,
    ScaleMap,
    State,
    Trajectory,
    UnitSystem,
)

logger = logging.getLogger(__name__)

FieldFunction = Callable[[float, np.ndarray], np.ndarray]


def _require_finite(s: State) -> None:
    if not (math.isfinite(s.x) and math.isfinite(s.y)):
        raise InvalidInputError(f"State must be finite, got ({s.x}, {s.y})")


def rhs_original(p: OriginalParams, x: float, y: float) -> tuple[float, float]:
    """Right-hand side in original units on raw floats (no validation)."""
    return (p.r * x / (1.0 + p.k * y) - p.c * x * y, p.c * x * y * y - p.m * y + p.u)


def rhs_normalized(p: NormalizedParams, x: float, y: float) -> tuple[float, float]:
    """Right-hand side in normalized units on raw floats (no validation)."""
    return (x / (1.0 + p.k * y) - x * y, x * y * y - p.m * y + p.u)


def vector_field_original(p: OriginalParams, s: State) -> tuple[float, float]:
    """Evaluate (dx/dt, dy/dt) of the release model in original units."""
    _require_finite(s)
    return rhs_original(p, s.x, s.y)


def vector_field_normalized(p: NormalizedParams, s: State) -> tuple[float, float]:
    """Evaluate (dx/dτ, dȳ/dτ) of the normalized release model."""
    _require_finite(s)
    return rhs_normalized(p, s.x, s.y)


def vector_field(p: Params, s: State) -> tuple[float, float]:
    """Dispatch on the unit system of ``p``."""
    if isinstance(p, OriginalParams):
        return vector_field_original(p, s)
    return vector_field_normalized(p, s)


def field_function(p: Params) -> FieldFunction:
    """Array form f(t, z) of the vector field, as consumed by the integrator."""
    if isinstance(p, OriginalParams):
        r, k, c, m, u = p.r, p.k, p.c, p.m, p.u

        def f(t: float, z: np.ndarray) -> np.ndarray:
            x, y = z
            return np.array([r * x / (1.0 + k * y) - c * x * y, c * x * y * y - m * y + u])

    else:
        k, m, u = p.k, p.m, p.u

        def f(t: float, z: np.ndarray) -> np.ndarray:
            x, y = z
            return np.array([x / (1.0 + k * y) - x * y, x * y * y - m * y + u])

    return f


def jacobian_normalized(p: NormalizedParams, s: State) -> Jacobian2:
    """Jacobian of the normalized field at ``s``."""
    _require_finite(s)
    x, y = s.x, s.y
    inhibition = 1.0 + p.k * y
    return Jacobian2(
        j11=1.0 / inhibition - y,
        j12=-p.k * x / inhibition**2 - x,
        j21=y * y,
        j22=2.0 * x * y - p.m,
    )


def jacobian_original(p: OriginalParams, s: State) -> Jacobian2:
    """Jacobian of the original-unit field at ``s``."""
    _require_finite(s)
    x, y = s.x, s.y
    inhibition = 1.0 + p.k * y
    return Jacobian2(
        j11=p.r / inhibition - p.c * y,
        j12=-p.r * p.k * x / inhibition**2 - p.c * x,
        j21=p.c * y * y,
        j22=2.0 * p.c * x * y - p.m,
    )


def jacobian(p: Params, s: State) -> Jacobian2:
    if isinstance(p, OriginalParams):
        return jacobian_original(p, s)
    return jacobian_normalized(p, s)


def nondimensionalize(p: OriginalParams) -> tuple[NormalizedParams, ScaleMap]:
    """Map original parameters to (k̄, m̄, ū) and return the state/time scale map."""
    normalized = NormalizedParams(
        k=p.k * p.r / p.c,
        m=p.m / p.r,
        u=p.c * p.u / (p.r * p.r),
    )
    return normalized, ScaleMap(state_scale_y=p.c / p.r, time_scale=p.r)


def dimensionalize(p: NormalizedParams, sm: ScaleMap) -> OriginalParams:
    """Inverse of :func:`nondimensionalize` for the original units fixed by ``sm``."""
    r = sm.time_scale
    c = sm.state_scale_y * r
    return OriginalParams(
        r=r,
        k=p.k * sm.state_scale_y,
        c=c,
        m=p.m * r,
        u=p.u * r / sm.state_scale_y,
    )


def dimensionalize_trajectory(traj: Trajectory, sm: ScaleMap) -> Trajectory:
    """Map a normalized trajectory back to original units (t = τ/r, y = ȳ r/c)."""
    if traj.unit_system is not UnitSystem.NORMALIZED:
        raise UnitMismatchError(
            f"Expected a normalized trajectory, got {traj.unit_system.value} units"
        )
    times, y = sm.to_original(traj.times, traj.states[:, 1])
    states = np.column_stack([traj.states[:, 0], y])
    return Trajectory(
        times=np.asarray(times, dtype=float),
        states=states,
        unit_system=UnitSystem.ORIGINAL,
        params=dimensionalize(traj.params, sm),
        complete=traj.complete,
    )


def dimensionalize_equilibrium(eq: Equilibrium, sm: ScaleMap) -> Equilibrium:
    """Map a normalized equilibrium to original units; eigenvalues scale with r."""
    if eq.unit_system is not UnitSystem.NORMALIZED:
        raise UnitMismatchError(f"{eq.name} is already in original units")
    _, y = sm.to_original(0.0, eq.location.y)
    eigenvalues = tuple(
        Eigenvalue(real=lam.real * sm.time_scale, imag=lam.imag * sm.time_scale)
        for lam in eq.eigenvalues
    )
    return eq.model_copy(
        update={
            "location": State(x=eq.location.x, y=y),
            "eigenvalues": eigenvalues,
            "unit_system": UnitSystem.ORIGINAL,
        }
    )
